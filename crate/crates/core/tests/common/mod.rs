#![allow(dead_code)]

use csta::{JointTensor, TransitionDataset, TransitionRecord};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random episodes in `[0, 1)^dim`, each chain drifting around its own centre.
/// Episodes end in termination with probability `p_terminal`.
pub fn random_dataset(rng: &mut ChaCha8Rng, k: usize, dim: usize, max_steps: usize, p_terminal: f64) -> TransitionDataset {
    let mut records = Vec::new();
    for chain in 1..=k {
        let centre: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let spread = 0.1 + 0.4 * rng.random::<f64>();
        let steps = rng.random_range(1..=max_steps);
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            centre
                .iter()
                .map(|c| (c + spread * (rng.random::<f64>() - 0.5)).clamp(0.0, 0.999))
                .collect()
        };
        let mut s = point(rng);
        for t in 0..steps {
            if t + 1 == steps && rng.random::<f64>() < p_terminal {
                records.push(TransitionRecord::terminal(chain, s.clone()));
                break;
            }
            let sp = point(rng);
            records.push(TransitionRecord::new(chain, s, sp.clone()));
            s = sp;
        }
    }
    TransitionDataset::new(dim, k, records).unwrap()
}

/// Random joint tensor with random prior; some cells zero.
pub fn random_joint(rng: &mut ChaCha8Rng, k: usize, size: usize) -> JointTensor {
    let n = size * size;
    let mut probs = Vec::with_capacity(k * n);
    for _ in 0..k {
        let mut slice: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() })
            .collect();
        slice[rng.random_range(0..n)] += 0.1;
        let total: f64 = slice.iter().sum();
        probs.extend(slice.into_iter().map(|p| p / total));
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = raw.iter().sum();
    JointTensor::new(k, size, probs, raw.into_iter().map(|w| w / total).collect()).unwrap()
}
