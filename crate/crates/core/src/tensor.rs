//! Abstract transition counts, joint and conditional probability tensors.
//!
//! Every tensor is dense with shape `(slices, size, size)`, where a slice is a
//! chain or a temporal window and `size` is `m` plus the terminal
//! pseudo-state when present. Slices or rows with no mass are kept as zeros
//! and flagged rather than imputed.

use crate::abstraction::StateAbstraction;
use crate::dataset::TransitionDataset;
use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::windows::TemporalAbstraction;

/// Integer transition counts `N[w, x, x']`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTensor {
    slices: usize,
    size: usize,
    counts: Vec<u64>,
}

impl CountTensor {
    pub fn zeros(slices: usize, size: usize) -> Self {
        Self {
            slices,
            size,
            counts: vec![0; slices * size * size],
        }
    }

    pub fn from_vec(slices: usize, size: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != slices * size * size {
            return Err(Error::ShapeMismatch(format!(
                "{} counts for shape ({slices}, {size}, {size})",
                counts.len()
            )));
        }
        Ok(Self { slices, size, counts })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, w: usize, x: usize, y: usize) -> u64 {
        self.counts[(w * self.size + x) * self.size + y]
    }

    pub(crate) fn get_mut(&mut self, w: usize, x: usize, y: usize) -> &mut u64 {
        &mut self.counts[(w * self.size + x) * self.size + y]
    }

    pub fn slice(&self, w: usize) -> &[u64] {
        let n = self.size * self.size;
        &self.counts[w * n..(w + 1) * n]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn slice_total(&self, w: usize) -> u64 {
        self.slice(w).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Joint probabilities `J[w, x, x']` with the slice weights attached.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTensor {
    slices: usize,
    size: usize,
    probs: Vec<f64>,
    weights: Vec<f64>,
    empty: Vec<bool>,
}

impl JointTensor {
    /// Wraps raw probabilities; slices summing to zero are flagged empty.
    pub fn new(slices: usize, size: usize, probs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if probs.len() != slices * size * size || weights.len() != slices {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities and {} weights for shape ({slices}, {size}, {size})",
                probs.len(),
                weights.len()
            )));
        }
        if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::NegativeProbability(p));
        }
        let n = size * size;
        let empty = (0..slices)
            .map(|w| probs[w * n..(w + 1) * n].iter().all(|&p| p == 0.0))
            .collect();
        Ok(Self {
            slices,
            size,
            probs,
            weights,
            empty,
        })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, w: usize, x: usize, y: usize) -> f64 {
        self.probs[(w * self.size + x) * self.size + y]
    }

    pub fn slice(&self, w: usize) -> &[f64] {
        let n = self.size * self.size;
        &self.probs[w * n..(w + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True for slices with zero support.
    pub fn is_empty_slice(&self, w: usize) -> bool {
        self.empty[w]
    }

    pub fn empty_flags(&self) -> &[bool] {
        &self.empty
    }

    /// Prior-weighted mixture `sum_w rho_w J_w`, flattened to `size * size`.
    pub fn mixture(&self) -> Vec<f64> {
        let n = self.size * self.size;
        let mut mix = vec![0.0; n];
        for w in 0..self.slices {
            let rho = self.weights[w];
            for (m, &p) in mix.iter_mut().zip(self.slice(w)) {
                *m += rho * p;
            }
        }
        mix
    }
}

/// Row-conditional probabilities `P[w, x, x']`, the abstract Markov chain per slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTensor {
    slices: usize,
    size: usize,
    probs: Vec<f64>,
    empty_rows: Vec<bool>,
}

impl ConditionalTensor {
    pub fn new(slices: usize, size: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != slices * size * size {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for shape ({slices}, {size}, {size})",
                probs.len()
            )));
        }
        if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::NegativeProbability(p));
        }
        let empty_rows = probs.chunks(size.max(1)).map(|r| r.iter().all(|&p| p == 0.0)).collect();
        Ok(Self {
            slices,
            size,
            probs,
            empty_rows,
        })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, w: usize, x: usize, y: usize) -> f64 {
        self.probs[(w * self.size + x) * self.size + y]
    }

    pub fn row(&self, w: usize, x: usize) -> &[f64] {
        let start = (w * self.size + x) * self.size;
        &self.probs[start..start + self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_empty_row(&self, w: usize, x: usize) -> bool {
        self.empty_rows[w * self.size + x]
    }
}

/// Counts records per (slice, source state, destination state).
pub fn compute_counts(
    dataset: &TransitionDataset,
    abstraction: &StateAbstraction,
    slicing: &TemporalAbstraction,
) -> Result<CountTensor> {
    if abstraction.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: abstraction.dim(),
        });
    }
    if slicing.k() != dataset.k() {
        return Err(Error::ShapeMismatch(format!(
            "slicing covers {} chains, dataset has {}",
            slicing.k(),
            dataset.k()
        )));
    }
    if dataset.has_terminal() && !abstraction.has_terminal() {
        return Err(Error::InvalidConfig(
            "dataset has terminal records but the abstraction has no terminal state".into(),
        ));
    }
    let slot = slicing.chain_to_window();
    let mut counts = CountTensor::zeros(slicing.len(), abstraction.size());
    for r in dataset.records() {
        if r.chain == 0 || r.chain > dataset.k() {
            return Err(Error::ChainOutOfRange {
                chain: r.chain,
                k: dataset.k(),
            });
        }
        let x = abstraction.assign(&r.state);
        let y = abstraction.assign_successor(&r.successor);
        *counts.get_mut(slot[r.chain - 1], x, y) += 1;
    }
    Ok(counts)
}

/// Normalises each slice by its grand sum and attaches `prior` as slice weights.
pub fn to_joint(counts: &CountTensor, prior: &Prior) -> Result<JointTensor> {
    if prior.len() != counts.slices() {
        return Err(Error::ShapeMismatch(format!(
            "prior has {} weights for {} slices",
            prior.len(),
            counts.slices()
        )));
    }
    let n = counts.size() * counts.size();
    let mut probs = vec![0.0; counts.slices() * n];
    for w in 0..counts.slices() {
        let total = counts.slice_total(w);
        if total == 0 {
            continue;
        }
        let total = total as f64;
        for (p, &c) in probs[w * n..(w + 1) * n].iter_mut().zip(counts.slice(w)) {
            *p = c as f64 / total;
        }
    }
    JointTensor::new(counts.slices(), counts.size(), probs, prior.weights().to_vec())
}

/// Normalises every row; rows with no mass stay zero and are flagged.
pub fn to_conditional(joint: &JointTensor) -> ConditionalTensor {
    let size = joint.size();
    let mut probs = joint.as_slice().to_vec();
    for row in probs.chunks_mut(size.max(1)) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            for p in row.iter_mut() {
                *p /= total;
            }
        }
    }
    ConditionalTensor::new(joint.slices(), size, probs).expect("shape preserved")
}

/// Aggregates a per-chain joint tensor into windows, weighting chains by the prior.
pub fn aggregate_temporal(
    per_chain: &JointTensor,
    windows: &TemporalAbstraction,
    prior: &Prior,
) -> Result<JointTensor> {
    if per_chain.slices() != windows.k() || prior.len() != windows.k() {
        return Err(Error::InvalidWindows(format!(
            "windows cover {} chains; tensor has {} slices and prior {} weights",
            windows.k(),
            per_chain.slices(),
            prior.len()
        )));
    }
    let window_prior = prior.aggregate(windows)?;
    let n = per_chain.size() * per_chain.size();
    let mut probs = vec![0.0; windows.len() * n];
    for (w, &(l, u)) in windows.windows().iter().enumerate() {
        let rho_w = window_prior.weights()[w];
        if rho_w <= 0.0 {
            continue;
        }
        let out = &mut probs[w * n..(w + 1) * n];
        for i in l..u {
            let rho = prior.weights()[i - 1];
            if rho == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(per_chain.slice(i - 1)) {
                *o += rho * p;
            }
        }
        for o in out.iter_mut() {
            *o /= rho_w;
        }
    }
    JointTensor::new(windows.len(), per_chain.size(), probs, window_prior.weights().to_vec())
}

/// Per-slice marginal visitation `M[w, x] = sum_x' J[w, x, x']`.
pub fn marginal_visitation(joint: &JointTensor) -> Vec<Vec<f64>> {
    let size = joint.size();
    (0..joint.slices())
        .map(|w| {
            joint
                .slice(w)
                .chunks(size.max(1))
                .map(|row| row.iter().sum())
                .collect()
        })
        .collect()
}

/// Joint tensor over `windows` built from scratch: count per chain, normalise,
/// then aggregate with the prior.
pub fn joint_probs(
    dataset: &TransitionDataset,
    abstraction: &StateAbstraction,
    windows: &TemporalAbstraction,
    prior: &Prior,
) -> Result<JointTensor> {
    let counts = compute_counts(dataset, abstraction, &TemporalAbstraction::null(dataset.k()))?;
    let per_chain = to_joint(&counts, prior)?;
    aggregate_temporal(&per_chain, windows, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TransitionRecord;

    fn two_state_1d() -> StateAbstraction {
        StateAbstraction::root(1, false).split(0, 0, 0.0).unwrap()
    }

    #[test]
    fn counts_direct_enumeration() {
        let ds = TransitionDataset::from_records(vec![
            TransitionRecord::new(1, vec![-1.0], vec![1.0]),
            TransitionRecord::new(1, vec![1.0], vec![2.0]),
            TransitionRecord::new(1, vec![2.0], vec![-5.0]),
        ])
        .unwrap();
        let c = compute_counts(&ds, &two_state_1d(), &TemporalAbstraction::null(1)).unwrap();
        assert_eq!(c.slice(0), &[0, 1, 1, 1]);
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn counts_terminal_column_and_absorbing_row() {
        let ds = TransitionDataset::from_records(vec![TransitionRecord::terminal(1, vec![0.5])]).unwrap();
        let a = StateAbstraction::root(1, true);
        let c = compute_counts(&ds, &a, &TemporalAbstraction::null(1)).unwrap();
        assert_eq!(c.size(), 2);
        assert_eq!(c.get(0, 0, 1), 1);
        assert_eq!(c.get(0, 1, 0) + c.get(0, 1, 1), 0);
        assert!(compute_counts(&ds, &StateAbstraction::root(1, false), &TemporalAbstraction::null(1)).is_err());
    }

    #[test]
    fn counts_empty_dataset_and_mismatch() {
        let ds = TransitionDataset::new(2, 3, vec![]).unwrap();
        let c = compute_counts(&ds, &StateAbstraction::root(2, false), &TemporalAbstraction::null(3)).unwrap();
        assert_eq!(c.slices(), 3);
        assert_eq!(c.total(), 0);
        assert!(matches!(
            compute_counts(&ds, &StateAbstraction::root(1, false), &TemporalAbstraction::null(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn joint_normalisation_and_flags() {
        let counts = CountTensor::from_vec(3, 2, vec![2, 0, 1, 1, 0, 0, 0, 0, 2, 0, 1, 1]).unwrap();
        let prior = Prior::new(vec![0.5, 0.0, 0.5]).unwrap();
        let j = to_joint(&counts, &prior).unwrap();
        assert_eq!(j.slice(0), &[0.5, 0.0, 0.25, 0.25]);
        assert!(j.is_empty_slice(1));
        assert_eq!(j.slice(1), &[0.0; 4]);
        assert_eq!(j.slice(0), j.slice(2));
        assert_eq!(j.weights(), prior.weights());
        assert!(to_joint(&counts, &Prior::new(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn conditional_rows() {
        let j = JointTensor::new(1, 2, vec![0.1, 0.3, 0.0, 0.0], vec![1.0]).unwrap();
        let p = to_conditional(&j);
        assert!((p.get(0, 0, 0) - 0.25).abs() < 1e-15);
        assert!((p.get(0, 0, 1) - 0.75).abs() < 1e-15);
        assert!(p.is_empty_row(0, 1));
        assert!(!p.is_empty_row(0, 0));

        let diag = JointTensor::new(1, 2, vec![0.5, 0.0, 0.0, 0.5], vec![1.0]).unwrap();
        assert_eq!(to_conditional(&diag).as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn aggregation_hand_example() {
        let j = JointTensor::new(2, 2, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let prior = Prior::new(vec![0.25, 0.75]).unwrap();
        let agg = aggregate_temporal(&j, &TemporalAbstraction::single(2), &prior).unwrap();
        assert_eq!(agg.slice(0), &[0.25, 0.0, 0.0, 0.75]);
        assert_eq!(agg.weights(), &[1.0]);
        let same = aggregate_temporal(&j, &TemporalAbstraction::null(2), &prior).unwrap();
        assert_eq!(same.as_slice(), j.as_slice());
        assert!(aggregate_temporal(&j, &TemporalAbstraction::null(3), &prior).is_err());
    }

    #[test]
    fn zero_weight_window_is_flagged() {
        let j = JointTensor::new(2, 1, vec![1.0, 1.0], vec![0.0, 1.0]).unwrap();
        let prior = Prior::new(vec![0.0, 1.0]).unwrap();
        let agg = aggregate_temporal(&j, &TemporalAbstraction::null(2), &prior).unwrap();
        assert!(agg.is_empty_slice(0));
        assert!(!agg.is_empty_slice(1));
    }

    #[test]
    fn visitation_marginals() {
        let j = JointTensor::new(2, 2, vec![0.5, 0.0, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let m = marginal_visitation(&j);
        assert_eq!(m[0], vec![0.5, 0.5]);
        assert_eq!(m[1], vec![0.0, 0.0]);
    }
}
