//! Greedy contrastive state abstraction.
//!
//! Starting from a single state covering `R^D`, every step evaluates the JSD
//! gain of splitting each state `x` along each dimension `d` at each valid
//! candidate threshold `c`, and applies the best split while its gain exceeds
//! `alpha`.
//!
//! The JSD decomposes into per-cell terms
//!
//! ```text
//! z(x, x') = sum_w a_w ln(a_w / rho_w) - A ln A,   a_w = rho_w J_w[x, x'],  A = sum_w a_w
//! ```
//!
//! so a split only changes the terms in the row and column of `x`. For each
//! `(x, d)` the records touching `x` are sorted by their coordinate on `d` and
//! moved from the upper child to the lower child as the threshold sweeps
//! upwards; each move updates two cells in O(1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abstraction::StateAbstraction;
use crate::dataset::TransitionDataset;
use crate::divergence::{jsd, plogp, weighted_plogp, StableSum};
use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::tensor::{CountTensor, JointTensor};
use crate::thresholds::{valid_state_thresholds, CandidateThresholds};
use crate::windows::TemporalAbstraction;

/// Candidates whose scores differ by less than this are treated as tied and
/// resolved by the deterministic ordering.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// A split is only accepted when its regularised delta exceeds this floor,
/// which absorbs rounding noise in zero-gain splits.
pub const DELTA_FLOOR: f64 = 1e-12;

const TERMINAL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsaConfig {
    pub alpha: f64,
    pub max_states: usize,
}

impl Default for CsaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            max_states: 64,
        }
    }
}

/// A candidate split `(x, d, c)` with its JSD gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSplit {
    pub state: usize,
    pub dim: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// A fully materialised split: the expanded joint tensor and its delta.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProposal {
    pub state: usize,
    pub dim: usize,
    pub threshold: f64,
    pub delta: f64,
    pub expanded: JointTensor,
}

/// One accepted split in the greedy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSplitStep {
    pub state: usize,
    pub dim: usize,
    pub threshold: f64,
    pub gain: f64,
    pub delta: f64,
    pub jsd_before: f64,
    pub jsd_after: f64,
    pub objective: f64,
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct CsaOutcome {
    pub abstraction: StateAbstraction,
    pub joint: JointTensor,
    pub counts: CountTensor,
    pub initial_jsd: f64,
    pub trace: Vec<StateSplitStep>,
}

/// Mutable search state over a fixed dataset, prior and slicing.
#[derive(Debug, Clone)]
pub struct StateSplitSearch<'a> {
    dataset: &'a TransitionDataset,
    slice_weights: Vec<f64>,
    record_slice: Vec<u32>,
    record_weight: Vec<f64>,
    src: Vec<u32>,
    dst: Vec<u32>,
    outbound: Vec<Vec<u32>>,
    inbound: Vec<Vec<u32>>,
    abstraction: StateAbstraction,
    counts: CountTensor,
    mass: Vec<f64>,
}

impl<'a> StateSplitSearch<'a> {
    /// Search state for the root abstraction `{R^D}`.
    pub fn new(dataset: &'a TransitionDataset, prior: &Prior, slicing: &TemporalAbstraction) -> Result<Self> {
        let root = StateAbstraction::root(dataset.dim(), dataset.has_terminal());
        Self::with_abstraction(dataset, prior, slicing, root)
    }

    pub fn with_abstraction(
        dataset: &'a TransitionDataset,
        prior: &Prior,
        slicing: &TemporalAbstraction,
        abstraction: StateAbstraction,
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if abstraction.dim() != dataset.dim() {
            return Err(Error::DimensionMismatch {
                expected: dataset.dim(),
                found: abstraction.dim(),
            });
        }
        if dataset.has_terminal() && !abstraction.has_terminal() {
            return Err(Error::InvalidConfig(
                "dataset has terminal records but the abstraction has no terminal state".into(),
            ));
        }
        if slicing.k() != dataset.k() {
            return Err(Error::InvalidWindows(format!(
                "slicing covers {} chains, dataset has {}",
                slicing.k(),
                dataset.k()
            )));
        }
        prior.check_support(dataset)?;
        let slice_weights = prior.aggregate(slicing)?.weights().to_vec();
        let slot = slicing.chain_to_window();
        let chain_counts = dataset.chain_counts();

        let n = dataset.len();
        let mut record_slice = Vec::with_capacity(n);
        let mut record_weight = Vec::with_capacity(n);
        let mut src = Vec::with_capacity(n);
        let mut dst = Vec::with_capacity(n);
        let mut outbound = vec![Vec::new(); abstraction.m()];
        let mut inbound = vec![Vec::new(); abstraction.m()];
        for (r, rec) in dataset.records().iter().enumerate() {
            let chain = rec.chain - 1;
            record_slice.push(slot[chain] as u32);
            record_weight.push(prior.weights()[chain] / chain_counts[chain] as f64);
            let x = abstraction.assign(&rec.state);
            src.push(x as u32);
            outbound[x].push(r as u32);
            match rec.successor.state() {
                Some(sp) => {
                    let y = abstraction.assign(sp);
                    dst.push(y as u32);
                    inbound[y].push(r as u32);
                }
                None => dst.push(TERMINAL),
            }
        }
        let mut search = Self {
            dataset,
            slice_weights,
            record_slice,
            record_weight,
            src,
            dst,
            outbound,
            inbound,
            counts: CountTensor::zeros(slicing.len(), abstraction.size()),
            mass: Vec::new(),
            abstraction,
        };
        let (counts, mass) = search.accumulate_all();
        search.counts = counts;
        search.mass = mass;
        Ok(search)
    }

    fn dst_index(&self, r: usize) -> usize {
        match self.dst[r] {
            TERMINAL => self.abstraction.size() - 1,
            y => y as usize,
        }
    }

    fn accumulate_all(&self) -> (CountTensor, Vec<f64>) {
        let size = self.abstraction.size();
        let mut counts = CountTensor::zeros(self.slice_weights.len(), size);
        let mut mass = vec![0.0; self.slice_weights.len() * size * size];
        for r in 0..self.src.len() {
            let w = self.record_slice[r] as usize;
            let (x, y) = (self.src[r] as usize, self.dst_index(r));
            *counts.get_mut(w, x, y) += 1;
            mass[(w * size + x) * size + y] += self.record_weight[r];
        }
        (counts, mass)
    }

    pub fn abstraction(&self) -> &StateAbstraction {
        &self.abstraction
    }

    pub fn m(&self) -> usize {
        self.abstraction.m()
    }

    pub fn counts(&self) -> &CountTensor {
        &self.counts
    }

    pub fn slice_weights(&self) -> &[f64] {
        &self.slice_weights
    }

    /// Joint tensor over the slicing, maintained incrementally across splits.
    pub fn joint(&self) -> JointTensor {
        mass_to_joint(&self.mass, &self.slice_weights, self.abstraction.size())
    }

    pub fn jsd(&self) -> f64 {
        jsd(&self.joint())
    }

    /// All `(x, d, c)` with `c` strictly inside state `x` on dimension `d`.
    pub fn valid_candidates(&self, cands: &CandidateThresholds) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (x, rect) in self.abstraction.states().iter().enumerate() {
            for d in 0..self.abstraction.dim() {
                out.extend(valid_state_thresholds(cands, rect, d).into_iter().map(|c| (x, d, c)));
            }
        }
        out
    }

    /// JSD gain of every valid candidate, in `(x, d, c)` order.
    pub fn all_split_gains(&self, cands: &CandidateThresholds) -> Vec<ScoredSplit> {
        let mut out = Vec::new();
        for x in 0..self.m() {
            for d in 0..self.abstraction.dim() {
                let thresholds = valid_state_thresholds(cands, &self.abstraction.states()[x], d);
                self.sweep(x, d, &thresholds, |i, gain| {
                    out.push(ScoredSplit {
                        state: x,
                        dim: d,
                        threshold: thresholds[i],
                        gain,
                    })
                });
            }
        }
        out
    }

    /// Highest-gain split, ties resolved by lowest state, dimension, threshold.
    pub fn best_split(&self, cands: &CandidateThresholds) -> Result<Option<ScoredSplit>> {
        if cands.dim() != self.abstraction.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.abstraction.dim(),
                found: cands.dim(),
            });
        }
        let pairs: Vec<(usize, usize)> = (0..self.m())
            .flat_map(|x| (0..self.abstraction.dim()).map(move |d| (x, d)))
            .collect();
        let groups: Vec<Vec<ScoredSplit>> = pairs
            .par_iter()
            .map(|&(x, d)| {
                let thresholds = valid_state_thresholds(cands, &self.abstraction.states()[x], d);
                let mut near = NearMax::default();
                self.sweep(x, d, &thresholds, |i, gain| {
                    let split = ScoredSplit {
                        state: x,
                        dim: d,
                        threshold: thresholds[i],
                        gain,
                    };
                    near.offer(split, gain)
                });
                near.into_items()
            })
            .collect();
        Ok(pick_first_near_max(groups.into_iter().flatten(), |s| s.gain))
    }

    /// Evaluates the gain of each threshold (ascending) for splitting `x` on `d`.
    fn sweep(&self, x: usize, d: usize, thresholds: &[f64], mut visit: impl FnMut(usize, f64)) {
        if thresholds.is_empty() {
            return;
        }
        let size = self.abstraction.size();
        let slices = self.slice_weights.len();
        let partners = size - 1;
        let pid = |p: usize| if p < x { p } else { p - 1 };
        let row_cell = |side: usize, p: usize| side * partners + pid(p);
        let col_cell = |p: usize, side: usize| 2 * partners + side * partners + pid(p);
        let internal = |ss: usize, sd: usize| 4 * partners + 2 * ss + sd;
        let cells = 4 * partners + 4;

        let mut cell_mass = vec![0.0; cells * slices];
        let mut cell_count = vec![0u32; cells * slices];
        for w in 0..slices {
            for p in (0..size).filter(|&p| p != x) {
                let row = (w * size + x) * size + p;
                let col = (w * size + p) * size + x;
                let rc = row_cell(1, p) * slices + w;
                let cc = col_cell(p, 1) * slices + w;
                cell_mass[rc] = self.mass[row];
                cell_count[rc] = self.counts.get(w, x, p) as u32;
                cell_mass[cc] = self.mass[col];
                cell_count[cc] = self.counts.get(w, p, x) as u32;
            }
            let ic = internal(1, 1) * slices + w;
            cell_mass[ic] = self.mass[(w * size + x) * size + x];
            cell_count[ic] = self.counts.get(w, x, x) as u32;
        }

        let weights = &self.slice_weights;
        let mut cell_terms = vec![0.0; cells];
        let mut cell_total = vec![0.0; cells];
        let mut cell_records = vec![0u64; cells];
        let mut cell_z = vec![0.0; cells];
        let mut running = StableSum::new();
        for c in 0..cells {
            let mut terms = StableSum::new();
            let mut total = StableSum::new();
            for w in 0..slices {
                let a = cell_mass[c * slices + w];
                terms.add(weighted_plogp(a, weights[w]));
                total.add(a);
                cell_records[c] += u64::from(cell_count[c * slices + w]);
            }
            cell_terms[c] = terms.value();
            cell_total[c] = total.value();
            cell_z[c] = cell_terms[c] - plogp(cell_total[c]);
            running.add(cell_z[c]);
        }
        let baseline = running.value();

        // Records touching x, and the side of x each endpoint currently lies on.
        struct Touch {
            record: usize,
            src_in_x: bool,
            dst_in_x: bool,
            src_upper: bool,
            dst_upper: bool,
        }
        let mut touches: Vec<Touch> = Vec::new();
        let mut events: Vec<(f64, u32, bool)> = Vec::new();
        let (out, inb) = (&self.outbound[x], &self.inbound[x]);
        let (mut i, mut j) = (0, 0);
        let records = self.dataset.records();
        while i < out.len() || j < inb.len() {
            let r = match (out.get(i), inb.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => unreachable!(),
            };
            let src_in_x = out.get(i) == Some(&r);
            let dst_in_x = inb.get(j) == Some(&r);
            i += usize::from(src_in_x);
            j += usize::from(dst_in_x);
            let li = touches.len() as u32;
            let rec = &records[r as usize];
            if src_in_x {
                events.push((rec.state[d], li, true));
            }
            if dst_in_x {
                let sp = rec.successor.state().expect("inbound records have a successor");
                events.push((sp[d], li, false));
            }
            touches.push(Touch {
                record: r as usize,
                src_in_x,
                dst_in_x,
                src_upper: true,
                dst_upper: true,
            });
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let cell_of = |t: &Touch| -> usize {
            let (ss, sd) = (usize::from(t.src_upper), usize::from(t.dst_upper));
            match (t.src_in_x, t.dst_in_x) {
                (true, true) => internal(ss, sd),
                (true, false) => row_cell(ss, self.dst_index(t.record)),
                (false, true) => col_cell(self.src[t.record] as usize, sd),
                (false, false) => unreachable!(),
            }
        };

        let mut next = 0;
        for (ti, &c) in thresholds.iter().enumerate() {
            while next < events.len() && events[next].0 < c {
                let (_, li, is_src) = events[next];
                next += 1;
                let t = &mut touches[li as usize];
                let from = cell_of(t);
                if is_src {
                    t.src_upper = false;
                } else {
                    t.dst_upper = false;
                }
                let to = cell_of(t);
                let w = self.record_slice[t.record] as usize;
                let weight = self.record_weight[t.record];
                for (cell, sign) in [(from, -1i8), (to, 1i8)] {
                    let k = cell * slices + w;
                    let old_a = cell_mass[k];
                    let new_a;
                    if sign < 0 {
                        cell_count[k] -= 1;
                        cell_records[cell] -= 1;
                        new_a = if cell_count[k] == 0 { 0.0 } else { old_a - weight };
                    } else {
                        cell_count[k] += 1;
                        cell_records[cell] += 1;
                        new_a = old_a + weight;
                    }
                    cell_mass[k] = new_a;
                    let old_z = cell_z[cell];
                    if cell_records[cell] == 0 {
                        cell_terms[cell] = 0.0;
                        cell_total[cell] = 0.0;
                    } else {
                        cell_terms[cell] += weighted_plogp(new_a, weights[w]) - weighted_plogp(old_a, weights[w]);
                        cell_total[cell] += new_a - old_a;
                    }
                    cell_z[cell] = cell_terms[cell] - plogp(cell_total[cell]);
                    running.add(cell_z[cell] - old_z);
                }
            }
            visit(ti, running.value() - baseline);
        }
    }

    /// Expanded counts and joint tensor for splitting `x` at `(d, c)`, obtained by
    /// redistributing only the records whose source or destination lies in `x`.
    /// The lower child keeps index `x`; the upper child takes index `m`.
    pub fn split_state_probs(&self, x: usize, d: usize, c: f64) -> Result<(CountTensor, JointTensor)> {
        let (counts, mass) = self.expanded(x, d, c)?;
        let joint = mass_to_joint(&mass, &self.slice_weights, counts.size());
        Ok((counts, joint))
    }

    fn expanded(&self, x: usize, d: usize, c: f64) -> Result<(CountTensor, Vec<f64>)> {
        if x >= self.m() {
            return Err(Error::UnknownState {
                state: x,
                size: self.m(),
            });
        }
        if d >= self.abstraction.dim() || !self.abstraction.states()[x].is_interior(d, c) {
            return Err(Error::InvalidThreshold {
                state: x,
                dim: d,
                threshold: c,
            });
        }
        let m = self.m();
        let size = self.abstraction.size();
        let new_size = size + 1;
        let remap = |j: usize| if j < m { j } else { j + 1 };
        let slices = self.slice_weights.len();
        let mut counts = CountTensor::zeros(slices, new_size);
        let mut mass = vec![0.0; slices * new_size * new_size];
        for w in 0..slices {
            for a in 0..size {
                for b in 0..size {
                    if a == x || b == x {
                        continue;
                    }
                    *counts.get_mut(w, remap(a), remap(b)) = self.counts.get(w, a, b);
                    mass[(w * new_size + remap(a)) * new_size + remap(b)] = self.mass[(w * size + a) * size + b];
                }
            }
        }
        let records = self.dataset.records();
        let side = |v: f64| if v < c { x } else { m };
        for r in merge_sorted(&self.outbound[x], &self.inbound[x]) {
            let rec = &records[r];
            let a = if self.src[r] as usize == x {
                side(rec.state[d])
            } else {
                remap(self.src[r] as usize)
            };
            let b = match self.dst[r] {
                TERMINAL => new_size - 1,
                y if y as usize == x => side(rec.successor.state().expect("successor")[d]),
                y => remap(y as usize),
            };
            let w = self.record_slice[r] as usize;
            *counts.get_mut(w, a, b) += 1;
            mass[(w * new_size + a) * new_size + b] += self.record_weight[r];
        }
        Ok((counts, mass))
    }

    /// Materialises the split with its delta computed from full tensors.
    pub fn propose(&self, x: usize, d: usize, c: f64, alpha: f64) -> Result<SplitProposal> {
        let (_, expanded) = self.split_state_probs(x, d, c)?;
        let delta = delta_state_split(&self.joint(), &expanded, alpha);
        Ok(SplitProposal {
            state: x,
            dim: d,
            threshold: c,
            delta,
            expanded,
        })
    }

    /// Applies the split, updating the abstraction, tensors and record assignments.
    pub fn apply(&mut self, x: usize, d: usize, c: f64) -> Result<()> {
        let (counts, mass) = self.expanded(x, d, c)?;
        let abstraction = self.abstraction.split(x, d, c)?;
        let new_state = self.m();
        let records = self.dataset.records();
        let outbound = std::mem::take(&mut self.outbound[x]);
        let (lower, upper): (Vec<u32>, Vec<u32>) = outbound
            .into_iter()
            .partition(|&r| records[r as usize].state[d] < c);
        for &r in &upper {
            self.src[r as usize] = new_state as u32;
        }
        self.outbound[x] = lower;
        self.outbound.push(upper);
        let inbound = std::mem::take(&mut self.inbound[x]);
        let (lower, upper): (Vec<u32>, Vec<u32>) = inbound
            .into_iter()
            .partition(|&r| records[r as usize].successor.state().expect("successor")[d] < c);
        for &r in &upper {
            self.dst[r as usize] = new_state as u32;
        }
        self.inbound[x] = lower;
        self.inbound.push(upper);
        self.abstraction = abstraction;
        self.counts = counts;
        self.mass = mass;
        Ok(())
    }

    pub fn into_parts(self) -> (StateAbstraction, CountTensor, JointTensor) {
        let joint = self.joint();
        (self.abstraction, self.counts, joint)
    }
}

/// `jsd(expanded) - jsd(current) - alpha`, evaluated on full tensors.
pub fn delta_state_split(current: &JointTensor, expanded: &JointTensor, alpha: f64) -> f64 {
    jsd(expanded) - jsd(current) - alpha
}

fn mass_to_joint(mass: &[f64], weights: &[f64], size: usize) -> JointTensor {
    let n = size * size;
    let mut probs = mass.to_vec();
    for (w, &rho) in weights.iter().enumerate() {
        for p in probs[w * n..(w + 1) * n].iter_mut() {
            *p = if rho > 0.0 { *p / rho } else { 0.0 };
        }
    }
    JointTensor::new(weights.len(), size, probs, weights.to_vec()).expect("consistent shape")
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).map(|&r| r as usize).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Candidates within [`TIE_TOLERANCE`] of the best seen so far, in offer order.
#[derive(Debug)]
pub(crate) struct NearMax<T> {
    best: f64,
    items: Vec<(T, f64)>,
}

impl<T> Default for NearMax<T> {
    fn default() -> Self {
        Self {
            best: f64::NEG_INFINITY,
            items: Vec::new(),
        }
    }
}

impl<T> NearMax<T> {
    pub(crate) fn offer(&mut self, item: T, score: f64) {
        if score > self.best {
            self.best = score;
            let floor = score - TIE_TOLERANCE;
            self.items.retain(|(_, s)| *s >= floor);
        }
        if score >= self.best - TIE_TOLERANCE {
            self.items.push((item, score));
        }
    }

    pub(crate) fn into_items(self) -> Vec<T> {
        self.items.into_iter().map(|(t, _)| t).collect()
    }
}

/// First item (in iteration order) scoring within [`TIE_TOLERANCE`] of the maximum.
pub(crate) fn pick_first_near_max<T: Copy>(items: impl IntoIterator<Item = T>, score: impl Fn(&T) -> f64) -> Option<T> {
    let items: Vec<T> = items.into_iter().collect();
    let max = items.iter().map(&score).fold(f64::NEG_INFINITY, f64::max);
    items.into_iter().find(|it| score(it) >= max - TIE_TOLERANCE)
}

/// Greedy state abstraction against a fixed slicing (`T_init`).
pub fn run_csa(
    dataset: &TransitionDataset,
    prior: &Prior,
    slicing: &TemporalAbstraction,
    cands: &CandidateThresholds,
    config: &CsaConfig,
) -> Result<CsaOutcome> {
    if !(config.alpha >= 0.0) || config.max_states == 0 {
        return Err(Error::InvalidConfig(format!(
            "alpha must be >= 0 and max_states >= 1 (got {}, {})",
            config.alpha, config.max_states
        )));
    }
    let mut search = StateSplitSearch::new(dataset, prior, slicing)?;
    let initial_jsd = search.jsd();
    let mut jsd_now = initial_jsd;
    let mut trace = Vec::new();
    while search.m() < config.max_states {
        let Some(best) = search.best_split(cands)? else {
            break;
        };
        let delta = best.gain - config.alpha;
        if delta <= DELTA_FLOOR {
            break;
        }
        search.apply(best.state, best.dim, best.threshold)?;
        let jsd_after = search.jsd();
        trace.push(StateSplitStep {
            state: best.state,
            dim: best.dim,
            threshold: best.threshold,
            gain: best.gain,
            delta,
            jsd_before: jsd_now,
            jsd_after,
            objective: jsd_after - config.alpha * (search.m() - 1) as f64,
            m: search.m(),
        });
        jsd_now = jsd_after;
    }
    let (abstraction, counts, joint) = search.into_parts();
    Ok(CsaOutcome {
        abstraction,
        joint,
        counts,
        initial_jsd,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TransitionRecord;
    use crate::tensor::joint_probs;

    fn one_d(records: &[(usize, f64, f64)]) -> TransitionDataset {
        let records = records
            .iter()
            .map(|&(i, s, sp)| TransitionRecord::new(i, vec![s], vec![sp]))
            .collect();
        TransitionDataset::from_records(records).unwrap()
    }

    #[test]
    fn flip_flop_split() {
        let ds = one_d(&[(1, -1.0, 1.0), (1, 1.0, -1.0)]);
        let prior = Prior::from_counts(&ds).unwrap();
        let search = StateSplitSearch::new(&ds, &prior, &TemporalAbstraction::null(1)).unwrap();
        let (counts, joint) = search.split_state_probs(0, 0, 0.0).unwrap();
        assert_eq!(counts.as_slice(), &[0, 1, 1, 0]);
        assert_eq!(joint.as_slice(), &[0.0, 0.5, 0.5, 0.0]);
        assert!(search.split_state_probs(0, 0, f64::INFINITY).is_err());
    }

    #[test]
    fn degenerate_split_leaves_empty_child() {
        let ds = one_d(&[(1, 0.2, 0.3), (2, 0.4, 0.1)]);
        let prior = Prior::from_counts(&ds).unwrap();
        let search = StateSplitSearch::new(&ds, &prior, &TemporalAbstraction::null(2)).unwrap();
        let (_, joint) = search.split_state_probs(0, 0, 5.0).unwrap();
        for w in 0..2 {
            assert_eq!(joint.slice(w), &[1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn separated_chains_split_at_boundary() {
        let ds = one_d(&[
            (1, 0.2, 0.7),
            (1, 0.7, 0.8),
            (1, 0.8, 0.3),
            (2, 1.2, 1.7),
            (2, 1.7, 1.1),
            (2, 1.1, 1.3),
        ]);
        let prior = Prior::from_counts(&ds).unwrap();
        let cands = CandidateThresholds::manual(vec![vec![0.5, 1.0, 1.5]]).unwrap();
        let search = StateSplitSearch::new(&ds, &prior, &TemporalAbstraction::null(2)).unwrap();
        let gains: Vec<f64> = search.all_split_gains(&cands).iter().map(|s| s.gain).collect();
        assert!(gains[1] > gains[0] && gains[1] > gains[2], "{gains:?}");
        let slicing = TemporalAbstraction::null(2);
        let cfg = CsaConfig {
            alpha: 0.01,
            max_states: 64,
        };
        let out = run_csa(&ds, &prior, &slicing, &cands, &cfg).unwrap();
        assert_eq!(out.trace[0].threshold, 1.0);
        assert!((out.trace[0].gain - std::f64::consts::LN_2).abs() < 1e-12);

        let strict = CsaConfig {
            alpha: std::f64::consts::LN_2 + 1e-6,
            max_states: 64,
        };
        assert_eq!(run_csa(&ds, &prior, &slicing, &cands, &strict).unwrap().abstraction.m(), 1);
    }

    #[test]
    fn single_chain_never_splits() {
        let ds = one_d(&[(1, 0.1, 0.6), (1, 0.6, 0.3), (1, 0.3, 0.9)]);
        let prior = Prior::from_counts(&ds).unwrap();
        let cands = CandidateThresholds::manual(vec![vec![0.2, 0.5, 0.8]]).unwrap();
        let cfg = CsaConfig {
            alpha: 0.0,
            max_states: 64,
        };
        let out = run_csa(&ds, &prior, &TemporalAbstraction::null(1), &cands, &cfg).unwrap();
        assert_eq!(out.abstraction.m(), 1);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn identical_chains_give_minus_alpha() {
        let ds = one_d(&[(1, 0.1, 0.6), (1, 0.6, 0.3), (2, 0.1, 0.6), (2, 0.6, 0.3)]);
        let prior = Prior::from_counts(&ds).unwrap();
        let search = StateSplitSearch::new(&ds, &prior, &TemporalAbstraction::null(2)).unwrap();
        let p = search.propose(0, 0, 0.4, 0.05).unwrap();
        assert!((p.delta + 0.05).abs() < 1e-12);
    }

    #[test]
    fn local_gains_match_full_recount() {
        let ds = one_d(&[
            (1, 0.1, 0.6),
            (1, 0.6, 0.3),
            (1, 0.3, 0.95),
            (2, 0.9, 0.2),
            (2, 0.2, 0.7),
            (3, 0.7, 0.4),
            (3, 0.4, 0.45),
        ]);
        let prior = Prior::from_counts(&ds).unwrap();
        let slicing = TemporalAbstraction::null(3);
        let cands = CandidateThresholds::manual(vec![vec![0.25, 0.5, 0.65, 0.8]]).unwrap();
        let mut search = StateSplitSearch::new(&ds, &prior, &slicing).unwrap();
        for _ in 0..3 {
            for s in search.all_split_gains(&cands) {
                let (x, d, c) = (s.state, s.dim, s.threshold);
                let split = search.abstraction().split(x, d, c).unwrap();
                let batch = jsd(&joint_probs(&ds, &split, &slicing, &prior).unwrap());
                assert!((s.gain - (batch - search.jsd())).abs() < 1e-12, "{s:?}");
            }
            let best = search.best_split(&cands).unwrap().unwrap();
            search.apply(best.state, best.dim, best.threshold).unwrap();
            let batch = joint_probs(&ds, search.abstraction(), &slicing, &prior).unwrap();
            assert!((jsd(&batch) - search.jsd()).abs() < 1e-12);
        }
    }
}
