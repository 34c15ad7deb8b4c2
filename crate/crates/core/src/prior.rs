use serde::{Deserialize, Serialize};

use crate::dataset::TransitionDataset;
use crate::error::{Error, Result};
use crate::windows::TemporalAbstraction;

const SUM_TOLERANCE: f64 = 1e-12;

/// Weighting over slices (chains or windows); non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// Proportional to each chain's record count.
    #[default]
    Counts,
    /// Uniform over chains that have at least one record.
    Uniform,
}

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPrior("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidPrior(format!("weight {w} is negative or non-finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidPrior(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Scales non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidPrior(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn from_counts(dataset: &TransitionDataset) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let counts = dataset.chain_counts();
        Self::normalized(counts.into_iter().map(|c| c as f64).collect())
    }

    pub fn uniform(dataset: &TransitionDataset) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let counts = dataset.chain_counts();
        Self::normalized(counts.into_iter().map(|c| f64::from(u8::from(c > 0))).collect())
    }

    pub fn from_mode(dataset: &TransitionDataset, mode: PriorMode) -> Result<Self> {
        match mode {
            PriorMode::Counts => Self::from_counts(dataset),
            PriorMode::Uniform => Self::uniform(dataset),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-window sums `rho^T_w`.
    pub fn aggregate(&self, windows: &TemporalAbstraction) -> Result<Prior> {
        if windows.k() != self.weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "windows cover {} chains but the prior has {}",
                windows.k(),
                self.weights.len()
            )));
        }
        let weights = windows
            .windows()
            .iter()
            .map(|&(l, u)| self.weights[l - 1..u - 1].iter().sum())
            .collect();
        Ok(Self { weights })
    }

    /// Fails if any chain with positive weight has no records.
    pub fn check_support(&self, dataset: &TransitionDataset) -> Result<()> {
        if self.weights.len() != dataset.k() {
            return Err(Error::ShapeMismatch(format!(
                "prior has {} weights for {} chains",
                self.weights.len(),
                dataset.k()
            )));
        }
        for (i, (&w, n)) in self.weights.iter().zip(dataset.chain_counts()).enumerate() {
            if w > 0.0 && n == 0 {
                return Err(Error::InvalidPrior(format!(
                    "chain {} has positive weight but no records",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TransitionRecord;

    #[test]
    fn validation() {
        assert!(Prior::new(vec![0.25, 0.75]).is_ok());
        assert!(Prior::new(vec![0.25, 0.7]).is_err());
        assert!(Prior::new(vec![-0.25, 1.25]).is_err());
        assert!(Prior::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(Prior::normalized(vec![1.0, 3.0]).unwrap().weights(), &[0.25, 0.75]);
    }

    #[test]
    fn count_and_uniform_modes() {
        let records = vec![
            TransitionRecord::new(1, vec![0.0], vec![1.0]),
            TransitionRecord::new(3, vec![0.0], vec![1.0]),
            TransitionRecord::new(3, vec![1.0], vec![2.0]),
            TransitionRecord::new(3, vec![2.0], vec![3.0]),
        ];
        let ds = TransitionDataset::new(1, 3, records).unwrap();
        let counts = Prior::from_counts(&ds).unwrap();
        assert_eq!(counts.weights(), &[0.25, 0.0, 0.75]);
        assert!(counts.check_support(&ds).is_ok());
        let uniform = Prior::uniform(&ds).unwrap();
        assert_eq!(uniform.weights(), &[0.5, 0.0, 0.5]);
        let bad = Prior::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!(bad.check_support(&ds).is_err());
    }

    #[test]
    fn aggregate_over_windows() {
        let p = Prior::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let t = TemporalAbstraction::new(vec![(1, 3), (3, 5)], 4).unwrap();
        let agg = p.aggregate(&t).unwrap();
        assert!((agg.weights()[0] - 0.3).abs() < 1e-15);
        assert!((agg.weights()[1] - 0.7).abs() < 1e-15);
    }
}
