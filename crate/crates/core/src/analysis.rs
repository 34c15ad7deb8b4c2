//! Read-only interpretation of a finished abstraction: chain posteriors,
//! per-episode log-posterior series, prototype episodes, counterfactual
//! reviews and textual state labels.
//!
//! Eliminated windows (a zero-probability transition on the path, or zero
//! prior weight) are `None` rather than negative infinity.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abstraction::StateAbstraction;
use crate::dataset::TransitionDataset;
use crate::error::{Error, Result};
use crate::tensor::JointTensor;
use crate::window_split::AbstractionResult;

/// `Pr(w | x, x') = rho_w J_w[x, x'] / sum_v rho_v J_v[x, x']`.
pub fn chain_posterior(joint: &JointTensor, x: usize, to: usize) -> Result<Vec<f64>> {
    let size = joint.size();
    for s in [x, to] {
        if s >= size {
            return Err(Error::UnknownState { state: s, size });
        }
    }
    let scores: Vec<f64> = (0..joint.slices())
        .map(|w| joint.weights()[w] * joint.get(w, x, to))
        .collect();
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass { from: x, to });
    }
    Ok(scores.into_iter().map(|s| s / total).collect())
}

/// One episode mapped onto abstract states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub chain: usize,
    /// `len + 1` abstract states; ends with the terminal index if the episode terminated.
    pub path: Vec<usize>,
}

impl EpisodeTrace {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.path.windows(2).map(|p| (p[0], p[1]))
    }
}

/// Abstract paths of every episode in the dataset, in dataset order.
pub fn episode_traces(dataset: &TransitionDataset, abstraction: &StateAbstraction) -> Result<Vec<EpisodeTrace>> {
    if dataset.dim() != abstraction.dim() {
        return Err(Error::DimensionMismatch {
            expected: abstraction.dim(),
            found: dataset.dim(),
        });
    }
    if dataset.has_terminal() && !abstraction.has_terminal() {
        return Err(Error::ShapeMismatch(
            "dataset has terminal transitions but the abstraction has no terminal state".into(),
        ));
    }
    let records = dataset.records();
    Ok(dataset
        .episodes()
        .iter()
        .map(|ep| {
            let mut path: Vec<usize> = ep.records.iter().map(|&r| abstraction.assign(&records[r].state)).collect();
            if let Some(&last) = ep.records.last() {
                path.push(abstraction.assign_successor(&records[last].successor));
            }
            EpisodeTrace { chain: ep.chain, path }
        })
        .collect())
}

fn ln_or_none(p: f64) -> Option<f64> {
    (p > 0.0).then(|| p.ln())
}

fn check_path(result: &AbstractionResult, episode: &EpisodeTrace) -> Result<()> {
    let size = result.conditional.size();
    match episode.path.iter().find(|&&s| s >= size) {
        Some(&s) => Err(Error::UnknownState { state: s, size }),
        None => Ok(()),
    }
}

/// Per-window cumulative log posterior of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSeries {
    /// Window containing the episode's chain.
    pub true_window: usize,
    /// `values[w][t]`, `t = 0..=len`.
    pub values: Vec<Vec<Option<f64>>>,
    /// `values[w][t] - values[true_window][t]`; `None` if either side is eliminated.
    pub baseline: Vec<Vec<Option<f64>>>,
}

impl PosteriorSeries {
    /// Posterior over windows at step `t`, normalised over non-eliminated windows.
    pub fn normalized(&self, t: usize) -> Option<Vec<f64>> {
        normalize_log(&self.values.iter().map(|s| s[t]).collect::<Vec<_>>())
    }
}

/// Softmax over the finite entries; `None` if every window is eliminated.
pub fn normalize_log(log_values: &[Option<f64>]) -> Option<Vec<f64>> {
    let max = log_values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let exp: Vec<f64> = log_values.iter().map(|v| v.map_or(0.0, |v| (v - max).exp())).collect();
    let total: f64 = exp.iter().sum();
    Some(exp.into_iter().map(|e| e / total).collect())
}

/// `log rho_w + sum_{t' < t} log P_w[x_t', x_t'+1]` for every window and `t`.
pub fn episode_log_posterior_series(result: &AbstractionResult, episode: &EpisodeTrace) -> Result<PosteriorSeries> {
    check_path(result, episode)?;
    let true_window = result
        .windows
        .window_of(episode.chain)
        .ok_or(Error::ChainOutOfRange {
            chain: episode.chain,
            k: result.windows.k(),
        })?;
    let values: Vec<Vec<Option<f64>>> = (0..result.n())
        .map(|w| {
            let mut acc = ln_or_none(result.joint.weights()[w]);
            let mut series = Vec::with_capacity(episode.path.len());
            series.push(acc);
            for (x, y) in episode.transitions() {
                acc = acc.and_then(|a| ln_or_none(result.conditional.get(w, x, y)).map(|l| a + l));
                series.push(acc);
            }
            series
        })
        .collect();
    let baseline = values
        .iter()
        .map(|series| {
            series
                .iter()
                .zip(&values[true_window])
                .map(|(v, b)| Some(v.as_ref()? - b.as_ref()?))
                .collect()
        })
        .collect();
    Ok(PosteriorSeries {
        true_window,
        values,
        baseline,
    })
}

/// Mean log-likelihood of the episode under window `w`; `None` if any
/// transition has zero probability.
pub fn mean_log_likelihood(result: &AbstractionResult, episode: &EpisodeTrace, w: usize) -> Option<f64> {
    if episode.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for (x, y) in episode.transitions() {
        total += ln_or_none(result.conditional.get(w, x, y))?;
    }
    Some(total / episode.len() as f64)
}

/// Index into `episodes` of the window's prototype.
///
/// Candidates are the non-empty episodes whose chain lies in window `w`.
/// Ties go to the lowest chain, then to the earliest episode of that chain.
pub fn prototype_episode(result: &AbstractionResult, episodes: &[EpisodeTrace], w: usize) -> Result<usize> {
    if w >= result.n() {
        return Err(Error::UnknownWindow { window: w, n: result.n() });
    }
    let (l, u) = result.windows.windows()[w];
    for ep in episodes {
        check_path(result, ep)?;
    }
    let scored: Vec<(usize, Option<f64>)> = episodes
        .par_iter()
        .enumerate()
        .filter(|(_, ep)| (l..u).contains(&ep.chain) && !ep.is_empty())
        .map(|(i, ep)| (i, mean_log_likelihood(result, ep, w)))
        .collect();
    if scored.is_empty() {
        return Err(Error::NoEpisodes(w));
    }
    let key = |&(i, s): &(usize, Option<f64>)| (s.unwrap_or(f64::NEG_INFINITY), episodes[i].chain, i);
    let best = scored
        .iter()
        .copied()
        .reduce(|a, b| {
            let (sa, ca, ia) = key(&a);
            let (sb, cb, ib) = key(&b);
            if sb > sa || (sb == sa && (cb, ib) < (ca, ia)) {
                b
            } else {
                a
            }
        })
        .expect("non-empty");
    Ok(best.0)
}

/// One alternative successor in a counterfactual review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    pub successor: usize,
    /// Log posterior per window at `t + 1` under the alternative transition.
    pub log_posterior: Vec<Option<f64>>,
    /// Normalised posterior over windows; `None` if every window is eliminated.
    pub posterior: Option<Vec<f64>>,
    /// Total-variation distance from the factual posterior.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualReview {
    pub t: usize,
    pub from: usize,
    pub factual: usize,
    pub factual_posterior: Option<Vec<f64>>,
    /// Sorted by decreasing distance, then by successor index.
    pub alternatives: Vec<Counterfactual>,
}

fn total_variation(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => 0.5 * a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>(),
        (None, None) => 0.0,
        _ => 1.0,
    }
}

/// Replaces the transition at step `t` with every alternative successor that
/// has positive probability in some window, and ranks the alternatives by how
/// far they move the posterior at `t + 1`.
pub fn counterfactual_review(
    result: &AbstractionResult,
    episode: &EpisodeTrace,
    t: usize,
) -> Result<CounterfactualReview> {
    if t >= episode.len() {
        return Err(Error::InvalidTimestep { t, len: episode.len() });
    }
    let series = episode_log_posterior_series(result, episode)?;
    let from = episode.path[t];
    let factual = episode.path[t + 1];
    let factual_posterior = series.normalized(t + 1);
    let before: Vec<Option<f64>> = series.values.iter().map(|s| s[t]).collect();
    let size = result.conditional.size();
    let mut alternatives: Vec<Counterfactual> = (0..size)
        .filter(|&y| (0..result.n()).any(|w| result.conditional.get(w, from, y) > 0.0))
        .map(|y| {
            let log_posterior: Vec<Option<f64>> = before
                .iter()
                .enumerate()
                .map(|(w, b)| Some(b.as_ref()? + ln_or_none(result.conditional.get(w, from, y))?))
                .collect();
            let posterior = normalize_log(&log_posterior);
            let distance = total_variation(&posterior, &factual_posterior);
            Counterfactual {
                successor: y,
                log_posterior,
                posterior,
                distance,
            }
        })
        .collect();
    alternatives.sort_by(|a, b| b.distance.total_cmp(&a.distance).then(a.successor.cmp(&b.successor)));
    Ok(CounterfactualReview {
        t,
        from,
        factual,
        factual_posterior,
        alternatives,
    })
}

/// Conjunction of the finite bounds of each abstract state.
pub fn semantic_key(abstraction: &StateAbstraction, dim_names: &[String]) -> Result<Vec<String>> {
    if dim_names.len() != abstraction.dim() {
        return Err(Error::NameCountMismatch {
            expected: abstraction.dim(),
            found: dim_names.len(),
        });
    }
    Ok(abstraction
        .states()
        .iter()
        .map(|rect| {
            let parts: Vec<String> = rect
                .bounds
                .iter()
                .zip(dim_names)
                .filter_map(|(&(lo, hi), name)| {
                    let mut s = String::new();
                    match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => write!(s, "{name} ∈ [{lo}, {hi})").ok()?,
                        (true, false) => write!(s, "{name} ≥ {lo}").ok()?,
                        (false, true) => write!(s, "{name} < {hi}").ok()?,
                        (false, false) => return None,
                    }
                    Some(s)
                })
                .collect();
            if parts.is_empty() {
                "anywhere".to_string()
            } else {
                parts.join(" ∧ ")
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn posterior_arithmetic() {
        let joint = JointTensor::new(2, 1, vec![0.2, 0.1], vec![0.25, 0.75]).unwrap();
        let post = chain_posterior(&joint, 0, 0).unwrap();
        assert!((post[0] - 0.4).abs() < 1e-12 && (post[1] - 0.6).abs() < 1e-12);
        let joint = JointTensor::new(2, 2, vec![0.5, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5], vec![0.5, 0.5]).unwrap();
        assert_eq!(chain_posterior(&joint, 0, 1).unwrap(), vec![1.0, 0.0]);
        assert_eq!(chain_posterior(&joint, 1, 0), Err(Error::ZeroMass { from: 1, to: 0 }));
        assert!(chain_posterior(&joint, 2, 0).is_err());
    }

    #[test]
    fn softmax_skips_eliminated() {
        let p = normalize_log(&[Some(0.0), None, Some(0.0)]).unwrap();
        assert_eq!(p, vec![0.5, 0.0, 0.5]);
        assert_eq!(normalize_log(&[None, None]), None);
    }

    #[test]
    fn labels() {
        let names = vec!["x".to_string(), "y".to_string()];
        let root = StateAbstraction::root(2, false);
        assert_eq!(semantic_key(&root, &names).unwrap(), vec!["anywhere"]);
        let one = StateAbstraction::root(1, false).split(0, 0, 0.0).unwrap();
        assert_eq!(semantic_key(&one, &["y".to_string()]).unwrap(), vec!["y < 0", "y ≥ 0"]);
        let two = root.split(0, 0, 0.5).unwrap().split(1, 1, -0.1).unwrap();
        assert_eq!(semantic_key(&two, &names).unwrap()[1], "x ≥ 0.5 ∧ y < -0.1");
        assert!(semantic_key(&two, &names[..1]).is_err());
    }
}
