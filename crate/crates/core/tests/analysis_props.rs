mod common;

use csta::analysis::{
    chain_posterior, counterfactual_review, episode_log_posterior_series, episode_traces, mean_log_likelihood,
    prototype_episode, EpisodeTrace,
};
use csta::tensor::to_conditional;
use csta::{
    run_csta, AbstractionResult, CandidateThresholds, CstaConfig, Error, JointTensor, Prior, StateAbstraction,
    TemporalAbstraction, ThresholdMode,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two states split at 0 and two single-chain windows with
/// `P_1 = [[.5, .5], [.5, .5]]` and `P_2 = [[1, 0], [.25, .75]]`.
fn toy() -> AbstractionResult {
    let joint = JointTensor::new(2, 2, vec![0.25, 0.25, 0.25, 0.25, 0.5, 0.0, 0.125, 0.375], vec![0.5, 0.5]).unwrap();
    AbstractionResult {
        abstraction: StateAbstraction::root(1, false).split(0, 0, 0.0).unwrap(),
        windows: TemporalAbstraction::null(2),
        t_init: TemporalAbstraction::null(2),
        conditional: to_conditional(&joint),
        joint,
        prior: Prior::new(vec![0.5, 0.5]).unwrap(),
        config: CstaConfig::default(),
        state_initial_jsd: 0.0,
        state_trace: Vec::new(),
        temporal_initial_jsd: 0.0,
        temporal_trace: Vec::new(),
    }
}

fn ep(chain: usize, path: &[usize]) -> EpisodeTrace {
    EpisodeTrace {
        chain,
        path: path.to_vec(),
    }
}

#[test]
fn toy_series_matches_hand_sums() {
    let result = toy();
    let ln = f64::ln;
    let series = episode_log_posterior_series(&result, &ep(1, &[0, 1, 1])).unwrap();
    let expected_w1 = [ln(0.5), 2.0 * ln(0.5), 3.0 * ln(0.5)];
    for (v, e) in series.values[0].iter().zip(expected_w1) {
        assert!((v.unwrap() - e).abs() < 1e-12);
    }
    assert_eq!(series.values[1][0].map(|v| (v - ln(0.5)).abs() < 1e-12), Some(true));
    assert_eq!(&series.values[1][1..], &[None, None]);
    assert!(series.baseline[0].iter().all(|v| *v == Some(0.0)));
    assert_eq!(&series.baseline[1][1..], &[None, None]);

    let single = episode_log_posterior_series(&result, &ep(2, &[1, 1])).unwrap();
    assert_eq!(single.values.iter().map(|s| s[0]).collect::<Vec<_>>(), vec![Some(ln(0.5)); 2]);
    let lone = episode_log_posterior_series(&result, &ep(2, &[1])).unwrap();
    assert!(lone.values.iter().all(|s| s.len() == 1 && s[0] == Some(ln(0.5))));
    assert!(episode_log_posterior_series(&result, &ep(1, &[0, 2])).is_err());
}

#[test]
fn toy_counterfactual_ranking() {
    let result = toy();
    let review = counterfactual_review(&result, &ep(1, &[0, 1, 1]), 0).unwrap();
    assert_eq!(review.factual, 1);
    assert_eq!(review.factual_posterior, Some(vec![1.0, 0.0]));
    let order: Vec<usize> = review.alternatives.iter().map(|a| a.successor).collect();
    assert_eq!(order, vec![0, 1]);
    let top = &review.alternatives[0];
    let post = top.posterior.as_ref().unwrap();
    assert!((post[0] - 1.0 / 3.0).abs() < 1e-12 && (post[1] - 2.0 / 3.0).abs() < 1e-12);
    assert!((top.distance - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(review.alternatives[1].distance, 0.0);

    // Window 2 leads after 0 -> 0; the alternative 0 -> 1 is impossible under it.
    let review = counterfactual_review(&result, &ep(2, &[0, 0]), 0).unwrap();
    let alt = review.alternatives.iter().find(|a| a.successor == 1).unwrap();
    assert_eq!(alt.log_posterior[1], None);
    assert_eq!(alt.posterior, Some(vec![1.0, 0.0]));

    assert_eq!(
        counterfactual_review(&result, &ep(2, &[0, 0]), 1),
        Err(Error::InvalidTimestep { t: 1, len: 1 })
    );
}

#[test]
fn toy_prototype_matches_brute_force() {
    let result = toy();
    let episodes = vec![ep(2, &[1, 1]), ep(2, &[1, 0, 0]), ep(2, &[0, 0, 0]), ep(2, &[0, 1]), ep(1, &[0, 1])];
    let scores: Vec<Option<f64>> = episodes.iter().map(|e| mean_log_likelihood(&result, e, 1)).collect();
    assert_eq!(scores[2], Some(0.0));
    assert!((scores[0].unwrap() - 0.75f64.ln()).abs() < 1e-12);
    assert!((scores[1].unwrap() - 0.25f64.ln() / 2.0).abs() < 1e-12);
    assert_eq!(scores[3], None);
    assert_eq!(prototype_episode(&result, &episodes, 1).unwrap(), 2);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..10 {
        let mut shuffled = episodes.clone();
        shuffled.shuffle(&mut rng);
        let idx = prototype_episode(&result, &shuffled, 1).unwrap();
        assert_eq!(shuffled[idx], episodes[2]);
    }
    assert_eq!(prototype_episode(&result, &episodes[..4], 0), Err(Error::NoEpisodes(0)));
    assert_eq!(prototype_episode(&result, &episodes[4..], 0).unwrap(), 0);
}

#[test]
fn properties_on_learned_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..4 {
        let ds = common::random_dataset(&mut rng, 40, 2, 25, 0.5);
        let prior = Prior::from_counts(&ds).unwrap();
        let cands = CandidateThresholds::from_data(&ds, ThresholdMode::Percentiles, 9).unwrap();
        let config = CstaConfig {
            alpha: 0.02,
            beta: 0.005,
            epsilon: 3,
            ..CstaConfig::default()
        };
        let result = run_csta(&ds, &prior, &TemporalAbstraction::null(40), &cands, None, &config).unwrap();
        let size = result.abstraction.size();
        for x in 0..size {
            for y in 0..size {
                if let Ok(post) = chain_posterior(&result.joint, x, y) {
                    assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
        for trace in episode_traces(&ds, &result.abstraction).unwrap() {
            let series = episode_log_posterior_series(&result, &trace).unwrap();
            for s in &series.values {
                for pair in s.windows(2) {
                    match pair {
                        [Some(a), Some(b)] => assert!(b <= a),
                        [None, b] => assert!(b.is_none()),
                        _ => {}
                    }
                }
            }
            assert!(series.baseline[series.true_window].iter().all(|v| *v == Some(0.0)));
            for t in 0..=trace.len() {
                if let Some(p) = series.normalized(t) {
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
            for t in 0..trace.len() {
                let review = counterfactual_review(&result, &trace, t).unwrap();
                let identity = review.alternatives.iter().find(|a| a.successor == review.factual).unwrap();
                assert_eq!(identity.distance, 0.0);
            }
        }
    }
}
