//! Entropy, multi-distribution Jensen-Shannon divergence and the regularised
//! contrastive objectives. All logarithms are natural (nats).
//!
//! For a joint tensor `J` with slice weights `rho`:
//!
//! ```text
//! JSD(J | rho) = H(sum_w rho_w J_w) - sum_w rho_w H(J_w)
//! E[log Pr(w | x, x')] = JSD(J | rho) - H(rho)
//! ```
//!
//! Zero probabilities follow `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::JointTensor;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct StableSum {
    sum: f64,
    compensation: f64,
}

impl StableSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for StableSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = StableSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// `p ln p`, zero at `p = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `a ln(a / r)`: the weighted `rho J ln J` term written in terms of the
/// weighted mass `a = rho J` and weight `r`. Zero when `a = 0`.
#[inline]
pub fn weighted_plogp(a: f64, r: f64) -> f64 {
    if a > 0.0 {
        a * (a / r).ln()
    } else {
        0.0
    }
}

/// Shannon entropy of a non-negative vector (nats).
pub fn entropy(p: &[f64]) -> Result<f64> {
    if let Some(&v) = p.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::NegativeProbability(v));
    }
    Ok(-p.iter().map(|&v| plogp(v)).collect::<StableSum>().value())
}

/// Multi-distribution Jensen-Shannon divergence of the slices under their weights.
pub fn jsd(joint: &JointTensor) -> f64 {
    let mixture_entropy = -joint
        .mixture()
        .into_iter()
        .map(plogp)
        .collect::<StableSum>()
        .value();
    let mut mean_entropy = StableSum::new();
    for (w, &rho) in joint.weights().iter().enumerate() {
        if rho == 0.0 || joint.is_empty_slice(w) {
            continue;
        }
        let h = -joint.slice(w).iter().map(|&p| plogp(p)).collect::<StableSum>().value();
        mean_entropy.add(rho * h);
    }
    // Cancellation can leave a tiny negative residue; the divergence is non-negative.
    (mixture_entropy - mean_entropy.value()).max(0.0)
}

/// Prior-weighted expectation of the log posterior `log Pr(w | x, x')`.
///
/// Cells where the mixture has no mass are skipped.
pub fn expected_log_posterior(joint: &JointTensor) -> f64 {
    let mix = joint.mixture();
    let mut total = StableSum::new();
    for (w, &rho) in joint.weights().iter().enumerate() {
        if rho == 0.0 {
            continue;
        }
        for (&p, &q) in joint.slice(w).iter().zip(&mix) {
            if p > 0.0 && q > 0.0 {
                total.add(rho * p * (rho * p / q).ln());
            }
        }
    }
    total.value()
}

/// Complexity penalties for the number of abstract states and windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl ObjectiveConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha and beta must be finite and >= 0 (got {alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `jsd - alpha (m - 1) - beta (n - 1)`.
    pub fn penalize(&self, jsd: f64, m: usize, n: usize) -> f64 {
        jsd - self.alpha * (m.max(1) - 1) as f64 - self.beta * (n.max(1) - 1) as f64
    }
}

/// Regularised objective of an abstraction with `m` states and `n` windows.
pub fn objective(joint: &JointTensor, m: usize, n: usize, config: &ObjectiveConfig) -> f64 {
    config.penalize(jsd(joint), m, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy(&[0.5, 0.5]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // -(0.25 ln 0.25 + 0.75 ln 0.75)
        assert!((entropy(&[0.25, 0.75]).unwrap() - 0.562335).abs() < 1e-6);
        assert!(entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn jsd_closed_forms() {
        let same = JointTensor::new(2, 2, vec![0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4], vec![0.5, 0.5]).unwrap();
        assert!(jsd(&same).abs() < 1e-15);
        let disjoint = JointTensor::new(2, 2, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!((jsd(&disjoint) - std::f64::consts::LN_2).abs() < 1e-15);
        let single = JointTensor::new(1, 2, vec![0.1, 0.2, 0.3, 0.4], vec![1.0]).unwrap();
        assert_eq!(jsd(&single), 0.0);
    }

    #[test]
    fn log_posterior_closed_forms() {
        let same = JointTensor::new(3, 1, vec![1.0, 1.0, 1.0], vec![1.0 / 3.0; 3]).unwrap();
        assert!((expected_log_posterior(&same) + 3f64.ln()).abs() < 1e-12);
        let disjoint = JointTensor::new(2, 2, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!(expected_log_posterior(&disjoint).abs() < 1e-15);
    }

    #[test]
    fn objective_arithmetic() {
        let cfg = ObjectiveConfig::new(0.05, 0.0).unwrap();
        assert!((cfg.penalize(0.5, 12, 1) - (-0.05)).abs() < 1e-12);
        let cfg = ObjectiveConfig::new(0.05, 0.01).unwrap();
        assert!((cfg.penalize(0.5, 12, 10) - (-0.14)).abs() < 1e-12);
        assert_eq!(cfg.penalize(0.3, 1, 1), 0.3);
        assert!(ObjectiveConfig::new(-1.0, 0.0).is_err());
        let single = JointTensor::new(1, 1, vec![1.0], vec![1.0]).unwrap();
        assert_eq!(objective(&single, 1, 1, &cfg), 0.0);
    }

    #[test]
    fn stable_sum_cancellation() {
        let s: StableSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }
}
