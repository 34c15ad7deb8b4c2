use csta::synth::{
    generate_changepoint_walks, generate_random_walks, scaling_experiment, RandomWalkConfig, ScalingConfig, Strategy,
};

#[test]
fn lengths_and_clipping() {
    let cfg = RandomWalkConfig {
        k: 17,
        steps: 23,
        v: 0.2,
        sigma: 0.3,
        seed: 4,
    };
    let ds = generate_random_walks(&cfg).unwrap();
    assert_eq!(ds.len(), 17 * 22);
    assert_eq!(ds.chain_counts(), vec![22; 17]);
    assert_eq!(ds.episodes().len(), 17);
    assert!(ds.points().all(|p| p.iter().all(|&v| (0.0..=1.0).contains(&v))));
}

#[test]
fn seeded_generation_is_reproducible() {
    let cfg = RandomWalkConfig::default();
    assert_eq!(generate_random_walks(&cfg).unwrap(), generate_random_walks(&cfg).unwrap());
    let other = RandomWalkConfig { seed: 1, ..cfg };
    assert_ne!(generate_random_walks(&cfg).unwrap(), generate_random_walks(&other).unwrap());
}

#[test]
fn first_chain_drifts_along_its_heading() {
    let base = RandomWalkConfig {
        k: 100,
        steps: 100,
        v: 0.05,
        sigma: 0.02,
        seed: 0,
    };
    let theta = 3.0 * std::f64::consts::PI / 200.0;
    let expected = [base.v * theta.sin(), base.v * theta.cos()];
    // Steps starting at least v + 4 sigma from the boundary are never clipped in
    // practice, and conditioning on the start state leaves the increment unbiased.
    let margin = base.v + 4.0 * base.sigma;
    let mut steps: Vec<[f64; 2]> = Vec::new();
    for seed in 0.. {
        if steps.len() >= base.steps - 1 {
            break;
        }
        let ds = generate_random_walks(&RandomWalkConfig { seed, ..base }).unwrap();
        steps.extend(
            ds.records()
                .iter()
                .filter(|r| r.chain == 1 && r.state.iter().all(|&v| v > margin && v < 1.0 - margin))
                .map(|r| {
                    let sp = r.successor.state().unwrap();
                    [sp[0] - r.state[0], sp[1] - r.state[1]]
                }),
        );
    }
    let n = steps.len() as f64;
    for d in 0..2 {
        let mean = steps.iter().map(|s| s[d]).sum::<f64>() / n;
        assert!((mean - expected[d]).abs() < 3.0 * base.sigma / n.sqrt(), "dim {d}: {mean}");
    }
}

#[test]
fn change_point_regimes() {
    let cfg = RandomWalkConfig {
        k: 6,
        steps: 30,
        v: 0.0,
        sigma: 0.0,
        seed: 2,
    };
    let ds = generate_changepoint_walks(&cfg, 6).unwrap();
    assert!(ds.records().iter().all(|r| r.successor.state() == Some(r.state.as_slice())));
    let moving = RandomWalkConfig { v: 0.01, ..cfg };
    let ds = generate_changepoint_walks(&moving, 4).unwrap();
    for r in ds.records() {
        let dy = r.successor.state().unwrap()[1] - r.state[1];
        let clipped = r.state[1] == 0.0 || r.state[1] == 1.0 || dy == 0.0;
        if !clipped {
            assert_eq!(dy > 0.0, r.chain < 4, "chain {}", r.chain);
        }
    }
}

#[test]
fn small_scaling_run() {
    let config = ScalingConfig {
        walk: RandomWalkConfig {
            k: 20,
            steps: 30,
            ..RandomWalkConfig::default()
        },
        seeds: vec![0, 1],
        max_m: 4,
        max_n: 3,
        thresholds: 9,
        states_for_windows: 4,
    };
    let results = scaling_experiment(&config).unwrap();
    assert_eq!(results.states.len(), 2 * 2 * 4);
    assert_eq!(results.windows.len(), 2 * 2 * 3);
    for row in results.states.iter().chain(&results.windows).filter(|r| r.size == 1) {
        assert!(row.jsd.abs() < 1e-12 || row.jsd > 0.0);
    }
    assert!(results.states.iter().any(|r| r.strategy == Strategy::Random));
    assert_eq!(scaling_experiment(&config).unwrap(), results);

    let baseline = ScalingConfig { max_m: 1, max_n: 1, ..config };
    let rows = scaling_experiment(&baseline).unwrap();
    assert_eq!(rows.states.len(), 4);
    assert!(rows.states.iter().all(|r| r.size == 1 && r.jsd.abs() < 1e-12));
}

fn seed_curves(rows: &[csta::synth::ScalingRow], seeds: usize, max: usize) -> Vec<Vec<f64>> {
    let mut curves = vec![vec![f64::NAN; max + 1]; seeds];
    for r in rows.iter().filter(|r| r.strategy == Strategy::Greedy) {
        curves[r.seed as usize][r.size] = r.jsd;
    }
    curves
}

#[test]
fn greedy_curves_are_sublinear() {
    let seeds = 20;
    let config = ScalingConfig {
        seeds: (0..seeds as u64).collect(),
        max_m: 16,
        max_n: 16,
        ..ScalingConfig::default()
    };
    let results = scaling_experiment(&config).unwrap();

    // Mean gain of split m + 1 should not exceed that of split m, allowing 10% exceptions.
    let curves = seed_curves(&results.states, seeds, config.max_m);
    let mean_gain = |m: usize| curves.iter().map(|c| c[m + 1] - c[m]).sum::<f64>() / seeds as f64;
    let pairs = config.max_m - 2;
    let violations = (1..=pairs).filter(|&m| mean_gain(m + 1) > mean_gain(m)).count();
    assert!(violations * 10 <= pairs, "{violations} of {pairs} gains increased");

    for (seed, curve) in seed_curves(&results.windows, seeds, config.max_n).iter().enumerate() {
        for n in [2, 4, 8] {
            assert!(curve[2 * n] < 2.0 * curve[n], "seed {seed}: JSD({}) = {} vs JSD({n}) = {}", 2 * n, curve[2 * n], curve[n]);
        }
    }
}
