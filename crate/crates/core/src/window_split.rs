//! Greedy temporal partitioning and the end-to-end spatiotemporal driver.
//!
//! With per-chain weighted masses `G_i = rho_i J_i`, splitting window `w0`
//! into `w1`, `w2` changes the JSD by
//!
//! ```text
//! sum_cells f(G_w1, rho_w1) + f(G_w2, rho_w2) - f(G_w0, rho_w0),   f(a, r) = a ln(a / r)
//! ```
//!
//! which equals `rho_w0 * JSD([J_w1, J_w2] | [rho_w1, rho_w2] / rho_w0)`.
//! Windows untouched by a split keep their cached best cut.

use serde::{Deserialize, Serialize};

use crate::abstraction::StateAbstraction;
use crate::dataset::TransitionDataset;
use crate::divergence::{jsd, weighted_plogp, StableSum};
use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::state_split::{run_csa, CsaConfig, NearMax, StateSplitStep, DELTA_FLOOR, TIE_TOLERANCE};
use crate::tensor::{compute_counts, to_conditional, to_joint, ConditionalTensor, JointTensor};
use crate::thresholds::{exhaustive_temporal, valid_temporal_thresholds, CandidateThresholds};
use crate::windows::TemporalAbstraction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CstaConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Minimum window width.
    pub epsilon: usize,
    pub max_states: usize,
    pub max_windows: usize,
}

impl Default for CstaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            beta: 0.01,
            epsilon: 15,
            max_states: 64,
            max_windows: 32,
        }
    }
}

/// A candidate cut with its JSD gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCut {
    pub window: usize,
    pub cut: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSplitProposal {
    pub window: usize,
    pub cut: usize,
    pub delta: f64,
    pub expanded: JointTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSplitStep {
    pub window: usize,
    pub cut: usize,
    pub gain: f64,
    pub delta: f64,
    pub jsd_before: f64,
    pub jsd_after: f64,
    pub objective: f64,
    pub n: usize,
}

/// Search state for temporal partitioning over a fixed per-chain joint tensor.
#[derive(Debug, Clone)]
pub struct WindowSplitSearch {
    size: usize,
    prior: Prior,
    chain_mass: Vec<f64>,
    windows: TemporalAbstraction,
    window_mass: Vec<Vec<f64>>,
    window_weight: Vec<f64>,
    cache: Vec<Option<Vec<ScoredCut>>>,
}

impl WindowSplitSearch {
    /// Starts from a single window covering all chains.
    pub fn new(per_chain: &JointTensor, prior: &Prior) -> Result<Self> {
        Self::with_windows(per_chain, prior, TemporalAbstraction::single(per_chain.slices()))
    }

    pub fn with_windows(per_chain: &JointTensor, prior: &Prior, windows: TemporalAbstraction) -> Result<Self> {
        let k = per_chain.slices();
        if prior.len() != k || windows.k() != k {
            return Err(Error::ShapeMismatch(format!(
                "{k} chain slices, {} prior weights, windows over {} chains",
                prior.len(),
                windows.k()
            )));
        }
        let size = per_chain.size();
        let n = size * size;
        let mut chain_mass = vec![0.0; k * n];
        for i in 0..k {
            let rho = prior.weights()[i];
            for (g, &p) in chain_mass[i * n..(i + 1) * n].iter_mut().zip(per_chain.slice(i)) {
                *g = rho * p;
            }
        }
        let mut search = Self {
            size,
            prior: prior.clone(),
            chain_mass,
            cache: vec![None; windows.len()],
            window_mass: Vec::new(),
            window_weight: Vec::new(),
            windows,
        };
        let bounds = search.windows.windows().to_vec();
        for (l, u) in bounds {
            let (mass, weight) = search.range_mass(l, u);
            search.window_mass.push(mass);
            search.window_weight.push(weight);
        }
        Ok(search)
    }

    fn cells(&self) -> usize {
        self.size * self.size
    }

    fn chain(&self, i: usize) -> &[f64] {
        let n = self.cells();
        &self.chain_mass[(i - 1) * n..i * n]
    }

    /// Sum of `rho_i J_i` and of `rho_i` over chains `l..u`.
    fn range_mass(&self, l: usize, u: usize) -> (Vec<f64>, f64) {
        let mut mass = vec![0.0; self.cells()];
        for i in l..u {
            for (m, &g) in mass.iter_mut().zip(self.chain(i)) {
                *m += g;
            }
        }
        let weight = self.prior.weights()[l - 1..u - 1].iter().sum();
        (mass, weight)
    }

    pub fn windows(&self) -> &TemporalAbstraction {
        &self.windows
    }

    /// Current window joint tensor (prior-weighted aggregation of the per-chain tensor).
    pub fn joint(&self) -> JointTensor {
        let n = self.cells();
        let mut probs = Vec::with_capacity(self.windows.len() * n);
        for (mass, &r) in self.window_mass.iter().zip(&self.window_weight) {
            probs.extend(mass.iter().map(|&a| if r > 0.0 { a / r } else { 0.0 }));
        }
        JointTensor::new(self.windows.len(), self.size, probs, self.window_weight.clone())
            .expect("consistent shape")
    }

    pub fn jsd(&self) -> f64 {
        jsd(&self.joint())
    }

    /// Gain of every valid cut of window `w`, in ascending cut order.
    pub fn window_gains(&self, w: usize, cands: &[usize], epsilon: usize) -> Vec<ScoredCut> {
        let (l, u) = self.windows.windows()[w];
        let cuts = valid_temporal_thresholds(cands, (l, u), epsilon);
        if cuts.is_empty() {
            return Vec::new();
        }
        let n = self.cells();
        let width = u - l;
        // suffix[j] = sum of chain masses l + j .. u
        let mut suffix = vec![0.0; (width + 1) * n];
        let mut suffix_w = vec![0.0; width + 1];
        for j in (0..width).rev() {
            let (head, tail) = suffix.split_at_mut((j + 1) * n);
            let out = &mut head[j * n..];
            for ((o, &next), &g) in out.iter_mut().zip(&tail[..n]).zip(self.chain(l + j)) {
                *o = next + g;
            }
            suffix_w[j] = suffix_w[j + 1] + self.prior.weights()[l + j - 1];
        }
        let parent: f64 = (0..n)
            .map(|c| weighted_plogp(suffix[c], suffix_w[0]))
            .collect::<StableSum>()
            .value();

        let mut left = vec![0.0; n];
        let mut left_w = 0.0;
        let mut next_chain = l;
        let mut out = Vec::with_capacity(cuts.len());
        for cut in cuts {
            while next_chain < cut {
                for (a, &g) in left.iter_mut().zip(self.chain(next_chain)) {
                    *a += g;
                }
                left_w += self.prior.weights()[next_chain - 1];
                next_chain += 1;
            }
            let j = cut - l;
            let right = &suffix[j * n..(j + 1) * n];
            let mut total = StableSum::new();
            for c in 0..n {
                total.add(weighted_plogp(left[c], left_w));
                total.add(weighted_plogp(right[c], suffix_w[j]));
            }
            total.add(-parent);
            out.push(ScoredCut {
                window: w,
                cut,
                gain: total.value(),
            });
        }
        out
    }

    /// Highest-gain cut over all windows; ties go to the lowest window, then cut.
    pub fn best_split(&mut self, cands: &[usize], epsilon: usize) -> Option<ScoredCut> {
        for w in 0..self.windows.len() {
            if self.cache[w].is_none() {
                let mut near = NearMax::default();
                for cut in self.window_gains(w, cands, epsilon) {
                    near.offer(cut, cut.gain);
                }
                self.cache[w] = Some(near.into_items());
            }
        }
        let all = self.cache.iter().flatten().flatten().copied();
        let items: Vec<ScoredCut> = all.collect();
        let max = items.iter().map(|c| c.gain).fold(f64::NEG_INFINITY, f64::max);
        items.into_iter().find(|c| c.gain >= max - TIE_TOLERANCE)
    }

    /// Expanded `(n + 1)`-slice joint tensor with window `w` split at `cut`.
    pub fn split_window_probs(&self, w: usize, cut: usize) -> Result<JointTensor> {
        let windows = self.checked_split(w, cut)?;
        let n = self.cells();
        let mut probs = Vec::with_capacity(windows.len() * n);
        let mut weights = Vec::with_capacity(windows.len());
        for (v, &(l, u)) in windows.windows().iter().enumerate() {
            let (mass, r) = if v < w {
                (self.window_mass[v].clone(), self.window_weight[v])
            } else if v > w + 1 {
                (self.window_mass[v - 1].clone(), self.window_weight[v - 1])
            } else {
                self.range_mass(l, u)
            };
            probs.extend(mass.iter().map(|&a| if r > 0.0 { a / r } else { 0.0 }));
            weights.push(r);
        }
        JointTensor::new(windows.len(), self.size, probs, weights)
    }

    /// The cut's gain as `rho_w0` times the pairwise JSD of the two children.
    pub fn pairwise_gain(&self, w: usize, cut: usize) -> Result<f64> {
        let windows = self.checked_split(w, cut)?;
        let (l1, u1) = windows.windows()[w];
        let (l2, u2) = windows.windows()[w + 1];
        let (m1, r1) = self.range_mass(l1, u1);
        let (m2, r2) = self.range_mass(l2, u2);
        let r0 = r1 + r2;
        if r0 <= 0.0 {
            return Ok(0.0);
        }
        let scale = |m: Vec<f64>, r: f64| m.into_iter().map(move |a| if r > 0.0 { a / r } else { 0.0 });
        let probs: Vec<f64> = scale(m1, r1).chain(scale(m2, r2)).collect();
        let pair = JointTensor::new(2, self.size, probs, vec![r1 / r0, r2 / r0])?;
        Ok(r0 * jsd(&pair))
    }

    fn checked_split(&self, w: usize, cut: usize) -> Result<TemporalAbstraction> {
        self.windows.split(w, cut)
    }

    pub fn propose(&self, w: usize, cut: usize, beta: f64) -> Result<WindowSplitProposal> {
        let expanded = self.split_window_probs(w, cut)?;
        let delta = delta_window_split(&self.joint(), &expanded, beta);
        Ok(WindowSplitProposal {
            window: w,
            cut,
            delta,
            expanded,
        })
    }

    pub fn apply(&mut self, w: usize, cut: usize) -> Result<()> {
        let windows = self.checked_split(w, cut)?;
        let (l1, u1) = windows.windows()[w];
        let (l2, u2) = windows.windows()[w + 1];
        let (m1, r1) = self.range_mass(l1, u1);
        let (m2, r2) = self.range_mass(l2, u2);
        self.window_mass[w] = m1;
        self.window_weight[w] = r1;
        self.window_mass.insert(w + 1, m2);
        self.window_weight.insert(w + 1, r2);
        self.cache[w] = None;
        self.cache.insert(w + 1, None);
        for cut in self.cache.iter_mut().skip(w + 2).flatten() {
            for c in cut.iter_mut() {
                c.window += 1;
            }
        }
        self.windows = windows;
        Ok(())
    }
}

/// `jsd(expanded) - jsd(current) - beta`, evaluated on full tensors.
pub fn delta_window_split(current: &JointTensor, expanded: &JointTensor, beta: f64) -> f64 {
    jsd(expanded) - jsd(current) - beta
}

/// Outcome of the full state-then-temporal abstraction.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionResult {
    pub abstraction: StateAbstraction,
    pub windows: TemporalAbstraction,
    pub t_init: TemporalAbstraction,
    /// Window joint tensor `J^{X,T}` with `rho^T` as slice weights.
    pub joint: JointTensor,
    pub conditional: ConditionalTensor,
    /// Per-chain prior.
    pub prior: Prior,
    pub config: CstaConfig,
    pub state_initial_jsd: f64,
    pub state_trace: Vec<StateSplitStep>,
    pub temporal_initial_jsd: f64,
    pub temporal_trace: Vec<WindowSplitStep>,
}

impl AbstractionResult {
    pub fn m(&self) -> usize {
        self.abstraction.m()
    }

    pub fn n(&self) -> usize {
        self.windows.len()
    }

    pub fn jsd(&self) -> f64 {
        jsd(&self.joint)
    }

    pub fn objective(&self) -> f64 {
        self.jsd() - self.config.alpha * (self.m() - 1) as f64 - self.config.beta * (self.n() - 1) as f64
    }
}

fn validate(config: &CstaConfig) -> Result<()> {
    if !(config.alpha >= 0.0) || !(config.beta >= 0.0) {
        return Err(Error::InvalidConfig("alpha and beta must be >= 0".into()));
    }
    if config.epsilon == 0 {
        return Err(Error::InvalidConfig("epsilon must be >= 1".into()));
    }
    if config.max_states == 0 || config.max_windows == 0 {
        return Err(Error::InvalidConfig("max_states and max_windows must be >= 1".into()));
    }
    Ok(())
}

/// Greedy temporal partitioning of a per-chain joint tensor.
pub fn run_temporal(
    per_chain: &JointTensor,
    prior: &Prior,
    cands: &[usize],
    beta: f64,
    epsilon: usize,
    max_windows: usize,
) -> Result<(WindowSplitSearch, f64, Vec<WindowSplitStep>)> {
    let mut search = WindowSplitSearch::new(per_chain, prior)?;
    let initial = search.jsd();
    let mut jsd_now = initial;
    let mut trace = Vec::new();
    while search.windows().len() < max_windows {
        let Some(best) = search.best_split(cands, epsilon) else {
            break;
        };
        let delta = best.gain - beta;
        if delta <= DELTA_FLOOR {
            break;
        }
        search.apply(best.window, best.cut)?;
        let jsd_after = search.jsd();
        let n = search.windows().len();
        trace.push(WindowSplitStep {
            window: best.window,
            cut: best.cut,
            gain: best.gain,
            delta,
            jsd_before: jsd_now,
            jsd_after,
            objective: jsd_after - beta * (n - 1) as f64,
            n,
        });
        jsd_now = jsd_after;
    }
    Ok((search, initial, trace))
}

/// State abstraction against `t_init`, then temporal partitioning of the
/// per-chain tensor on the resulting states.
///
/// `cands_temporal` defaults to the exhaustive set `{2..k}`.
pub fn run_csta(
    dataset: &TransitionDataset,
    prior: &Prior,
    t_init: &TemporalAbstraction,
    cands_state: &CandidateThresholds,
    cands_temporal: Option<&[usize]>,
    config: &CstaConfig,
) -> Result<AbstractionResult> {
    validate(config)?;
    let csa = run_csa(
        dataset,
        prior,
        t_init,
        cands_state,
        &CsaConfig {
            alpha: config.alpha,
            max_states: config.max_states,
        },
    )?;
    let counts = compute_counts(dataset, &csa.abstraction, &TemporalAbstraction::null(dataset.k()))?;
    let per_chain = to_joint(&counts, prior)?;
    let exhaustive;
    let cands = match cands_temporal {
        Some(c) => c,
        None => {
            exhaustive = exhaustive_temporal(dataset.k());
            &exhaustive
        }
    };
    let (search, temporal_initial_jsd, temporal_trace) =
        run_temporal(&per_chain, prior, cands, config.beta, config.epsilon, config.max_windows)?;
    let joint = search.joint();
    let conditional = to_conditional(&joint);
    Ok(AbstractionResult {
        abstraction: csa.abstraction,
        windows: search.windows().clone(),
        t_init: t_init.clone(),
        joint,
        conditional,
        prior: prior.clone(),
        config: *config,
        state_initial_jsd: csa.initial_jsd,
        state_trace: csa.trace,
        temporal_initial_jsd,
        temporal_trace,
    })
}
