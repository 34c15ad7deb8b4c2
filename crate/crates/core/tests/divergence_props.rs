mod common;

use csta::{entropy, expected_log_posterior, jsd, JointTensor};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn joint_strategy() -> impl Strategy<Value = JointTensor> {
    (2usize..=5, 1usize..=6, any::<u64>()).prop_map(|(k, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        common::random_joint(&mut rng, k, m)
    })
}

proptest! {
    #[test]
    fn posterior_identity(joint in joint_strategy()) {
        let h = entropy(joint.weights()).unwrap();
        prop_assert!((expected_log_posterior(&joint) - (jsd(&joint) - h)).abs() < 1e-9);
    }

    #[test]
    fn jsd_bounded_by_prior_entropy(joint in joint_strategy()) {
        let value = jsd(&joint);
        prop_assert!(value >= -1e-12);
        prop_assert!(value <= entropy(joint.weights()).unwrap() + 1e-12);
    }

    #[test]
    fn jsd_ignores_slice_order(joint in joint_strategy()) {
        let k = joint.slices();
        let size = joint.size();
        let probs: Vec<f64> = (0..k).rev().flat_map(|w| joint.slice(w).to_vec()).collect();
        let weights: Vec<f64> = joint.weights().iter().rev().copied().collect();
        let reversed = JointTensor::new(k, size, probs, weights).unwrap();
        prop_assert!((jsd(&reversed) - jsd(&joint)).abs() < 1e-12);
    }

    #[test]
    fn jsd_ignores_state_relabelling(joint in joint_strategy(), seed in any::<u64>()) {
        let size = joint.size();
        let mut perm: Vec<usize> = (0..size).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let probs: Vec<f64> = (0..joint.slices())
            .flat_map(|w| {
                let joint = &joint;
                let perm = &perm;
                (0..size * size).map(move |c| joint.get(w, perm[c / size], perm[c % size]))
            })
            .collect();
        let relabelled = JointTensor::new(joint.slices(), size, probs, joint.weights().to_vec()).unwrap();
        prop_assert!((jsd(&relabelled) - jsd(&joint)).abs() < 1e-12);
    }

    #[test]
    fn single_slice_has_zero_jsd(seed in any::<u64>(), m in 1usize..=6) {
        let joint = common::random_joint(&mut ChaCha8Rng::seed_from_u64(seed), 1, m);
        let single = JointTensor::new(1, m, joint.slice(0).to_vec(), vec![1.0]).unwrap();
        prop_assert_eq!(jsd(&single), 0.0);
    }
}

#[test]
fn uniform_mixture_of_identical_slices() {
    let joint = JointTensor::new(3, 2, [0.25; 12].to_vec(), vec![1.0 / 3.0; 3]).unwrap();
    assert!(jsd(&joint).abs() < 1e-15);
    assert!((expected_log_posterior(&joint) + 3f64.ln()).abs() < 1e-12);
}
