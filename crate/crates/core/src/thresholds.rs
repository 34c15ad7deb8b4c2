//! Candidate split thresholds for state and temporal partitioning.

use serde::{Deserialize, Serialize};

use crate::abstraction::Hyperrectangle;
use crate::dataset::TransitionDataset;
use crate::error::{Error, Result};

/// How per-dimension candidates are derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `count` evenly spaced interior points of the observed range.
    Grid,
    /// Every distinct observed coordinate.
    Values,
    /// `count` empirical percentiles at `j / (count + 1)`.
    Percentiles,
}

/// Strictly increasing candidate lists, one per state dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateThresholds {
    per_dim: Vec<Vec<f64>>,
}

impl CandidateThresholds {
    /// Sorts and deduplicates hand-picked thresholds.
    pub fn manual(per_dim: Vec<Vec<f64>>) -> Result<Self> {
        let per_dim = per_dim
            .into_iter()
            .map(|mut c| {
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig("non-finite threshold".into()));
                }
                c.sort_by(f64::total_cmp);
                c.dedup();
                Ok(c)
            })
            .collect::<Result<_>>()?;
        Ok(Self { per_dim })
    }

    pub fn from_data(dataset: &TransitionDataset, mode: ThresholdMode, count_per_dim: usize) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if mode != ThresholdMode::Values && count_per_dim == 0 {
            return Err(Error::InvalidConfig("threshold count must be >= 1".into()));
        }
        let per_dim = (0..dataset.dim())
            .map(|d| {
                let mut values: Vec<f64> = dataset.points().map(|p| p[d]).collect();
                values.sort_by(f64::total_cmp);
                let mut cands = match mode {
                    ThresholdMode::Values => values,
                    ThresholdMode::Grid => {
                        let (lo, hi) = (values[0], values[values.len() - 1]);
                        (1..=count_per_dim)
                            .map(|j| lo + (hi - lo) * j as f64 / (count_per_dim + 1) as f64)
                            .collect()
                    }
                    ThresholdMode::Percentiles => (1..=count_per_dim)
                        .map(|j| percentile(&values, j as f64 / (count_per_dim + 1) as f64))
                        .collect(),
                };
                cands.dedup();
                cands
            })
            .collect();
        Ok(Self { per_dim })
    }

    pub fn dim(&self) -> usize {
        self.per_dim.len()
    }

    pub fn for_dim(&self, d: usize) -> &[f64] {
        &self.per_dim[d]
    }

    /// Total number of candidate values over all dimensions.
    pub fn len(&self) -> usize {
        self.per_dim.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Candidates strictly inside `state`'s interval on `dim`.
pub fn valid_state_thresholds(cands: &CandidateThresholds, state: &Hyperrectangle, dim: usize) -> Vec<f64> {
    let (lo, hi) = state.bounds[dim];
    cands
        .for_dim(dim)
        .iter()
        .copied()
        .filter(|&c| lo < c && c < hi)
        .collect()
}

/// Temporal cuts `i` with `l + epsilon <= i <= u - epsilon`.
pub fn valid_temporal_thresholds(cands: &[usize], window: (usize, usize), epsilon: usize) -> Vec<usize> {
    let (l, u) = window;
    cands
        .iter()
        .copied()
        .filter(|&i| i >= l + epsilon && i + epsilon <= u)
        .collect()
}

/// The exhaustive temporal candidate set `{2, ..., k}`.
pub fn exhaustive_temporal(k: usize) -> Vec<usize> {
    (2..=k).collect()
}
