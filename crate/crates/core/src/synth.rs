//! Synthetic Gaussian random walks in the unit square and the JSD scaling
//! experiment comparing greedy with random split selection.
//!
//! Chain `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so
//! each chain is reproducible independently of thread scheduling.

use std::f64::consts::PI;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{TransitionDataset, TransitionRecord};
use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::state_split::StateSplitSearch;
use crate::tensor::{compute_counts, to_joint};
use crate::thresholds::{exhaustive_temporal, valid_temporal_thresholds, CandidateThresholds, ThresholdMode};
use crate::window_split::WindowSplitSearch;
use crate::windows::TemporalAbstraction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkConfig {
    /// Number of chains.
    pub k: usize,
    /// States per trajectory.
    pub steps: usize,
    /// Mean speed per step.
    pub v: f64,
    /// Per-component noise standard deviation.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for RandomWalkConfig {
    fn default() -> Self {
        Self {
            k: 100,
            steps: 100,
            v: 0.05,
            sigma: 0.02,
            seed: 0,
        }
    }
}

impl RandomWalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if self.steps < 2 {
            return Err(Error::InvalidConfig("steps must be >= 2".into()));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) || !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("v and sigma must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Heading of chain `i`: rotates through 270 degrees over the sequence.
    pub fn heading(&self, i: usize) -> f64 {
        3.0 * PI * i as f64 / (2.0 * self.k as f64)
    }
}

fn walk(config: &RandomWalkConfig, chain: usize, heading: f64) -> Vec<TransitionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain as u64);
    let noise = Normal::new(0.0, config.sigma).expect("sigma validated");
    let drift = [config.v * heading.sin(), config.v * heading.cos()];
    let mut s = [rng.random::<f64>(), rng.random::<f64>()];
    let mut records = Vec::with_capacity(config.steps - 1);
    for _ in 1..config.steps {
        let next = [0, 1].map(|d| (s[d] + drift[d] + noise.sample(&mut rng)).clamp(0.0, 1.0));
        records.push(TransitionRecord::new(chain, s.to_vec(), next.to_vec()));
        s = next;
    }
    records
}

/// Random walks where chain `i` drifts along `heading(i)` (radians from the `y` axis).
pub fn generate_walks(config: &RandomWalkConfig, heading: impl Fn(usize) -> f64 + Sync) -> Result<TransitionDataset> {
    config.validate()?;
    let records: Vec<TransitionRecord> = (1..=config.k)
        .into_par_iter()
        .map(|i| walk(config, i, heading(i)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    TransitionDataset::new(2, config.k, records)
}

/// `k` trajectories of `steps` states in `[0, 1]^2`, each contributing `steps - 1` transitions.
pub fn generate_random_walks(config: &RandomWalkConfig) -> Result<TransitionDataset> {
    generate_walks(config, |i| config.heading(i))
}

/// Chains before `i_star` drift along heading 0 and the rest along heading pi.
pub fn generate_changepoint_walks(config: &RandomWalkConfig, i_star: usize) -> Result<TransitionDataset> {
    if i_star < 2 || i_star > config.k {
        return Err(Error::InvalidConfig(format!(
            "change point must satisfy 1 < i_star <= k = {} (got {i_star})",
            config.k
        )));
    }
    generate_walks(config, |i| if i < i_star { 0.0 } else { PI })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Walk parameters; `seed` is replaced by each entry of `seeds`.
    pub walk: RandomWalkConfig,
    pub seeds: Vec<u64>,
    pub max_m: usize,
    pub max_n: usize,
    /// Grid thresholds per dimension for state splits.
    pub thresholds: usize,
    /// Size of the greedy state abstraction used for the window axis.
    pub states_for_windows: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            walk: RandomWalkConfig::default(),
            seeds: (0..10).collect(),
            max_m: 32,
            max_n: 16,
            thresholds: 19,
            states_for_windows: 8,
        }
    }
}

/// The four walk settings swept by default (`v` in {0.02, 0.05}, `sigma` in {0.01, 0.05}).
pub fn default_walk_settings() -> Vec<(f64, f64)> {
    vec![(0.02, 0.01), (0.02, 0.05), (0.05, 0.01), (0.05, 0.05)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub size: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub jsd: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalingResults {
    /// JSD against the number of abstract states, one slice per chain.
    pub states: Vec<ScalingRow>,
    /// JSD against the number of windows on a fixed state abstraction.
    pub windows: Vec<ScalingRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub size: usize,
    pub strategy: Strategy,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// JSD after each forced state split, starting from `m = 1`.
fn state_curve<'a>(
    dataset: &'a TransitionDataset,
    prior: &Prior,
    cands: &CandidateThresholds,
    max_m: usize,
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, StateSplitSearch<'a>)> {
    let slicing = TemporalAbstraction::null(dataset.k());
    let mut search = StateSplitSearch::new(dataset, prior, &slicing)?;
    let mut curve = vec![search.jsd()];
    while search.m() < max_m {
        let choice = match strategy {
            Strategy::Greedy => search.best_split(cands)?.map(|s| (s.state, s.dim, s.threshold)),
            Strategy::Random => search.valid_candidates(cands).choose(rng).copied(),
        };
        let Some((x, d, c)) = choice else { break };
        search.apply(x, d, c)?;
        curve.push(search.jsd());
    }
    Ok((curve, search))
}

/// JSD after each forced window split, starting from `n = 1`.
fn window_curve(search: &mut WindowSplitSearch, k: usize, max_n: usize, strategy: Strategy, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let cands = exhaustive_temporal(k);
    let mut curve = vec![search.jsd()];
    while search.windows().len() < max_n {
        let choice = match strategy {
            Strategy::Greedy => search.best_split(&cands, 1).map(|c| (c.window, c.cut)),
            Strategy::Random => {
                let all: Vec<(usize, usize)> = search
                    .windows()
                    .windows()
                    .iter()
                    .enumerate()
                    .flat_map(|(w, &bounds)| valid_temporal_thresholds(&cands, bounds, 1).into_iter().map(move |c| (w, c)))
                    .collect();
                all.choose(rng).copied()
            }
        };
        let Some((w, cut)) = choice else { break };
        search.apply(w, cut)?;
        curve.push(search.jsd());
    }
    Ok(curve)
}

fn run_seed(config: &ScalingConfig, seed: u64) -> Result<ScalingResults> {
    let walk = RandomWalkConfig { seed, ..config.walk };
    let dataset = generate_random_walks(&walk)?;
    let prior = Prior::from_counts(&dataset)?;
    let cands = CandidateThresholds::from_data(&dataset, ThresholdMode::Grid, config.thresholds)?;
    let mut out = ScalingResults::default();

    let mut fixed_states = None;
    for strategy in [Strategy::Greedy, Strategy::Random] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (curve, _) = state_curve(&dataset, &prior, &cands, config.max_m, strategy, &mut rng)?;
        out.states.extend(curve.into_iter().enumerate().map(|(i, jsd)| ScalingRow {
            size: i + 1,
            strategy,
            seed,
            jsd,
        }));
        if strategy == Strategy::Greedy {
            let (_, search) = state_curve(&dataset, &prior, &cands, config.states_for_windows, strategy, &mut rng)?;
            fixed_states = Some(search.abstraction().clone());
        }
    }

    let states = fixed_states.expect("greedy pass ran");
    let counts = compute_counts(&dataset, &states, &TemporalAbstraction::null(dataset.k()))?;
    let per_chain = to_joint(&counts, &prior)?;
    for strategy in [Strategy::Greedy, Strategy::Random] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut search = WindowSplitSearch::new(&per_chain, &prior)?;
        let curve = window_curve(&mut search, dataset.k(), config.max_n, strategy, &mut rng)?;
        out.windows.extend(curve.into_iter().enumerate().map(|(i, jsd)| ScalingRow {
            size: i + 1,
            strategy,
            seed,
            jsd,
        }));
    }
    Ok(out)
}

/// JSD against abstraction size for greedy and random split selection,
/// one walk dataset per seed. Seeds run in parallel; rows are in seed order.
pub fn scaling_experiment(config: &ScalingConfig) -> Result<ScalingResults> {
    if config.max_m == 0 || config.max_n == 0 {
        return Err(Error::InvalidConfig("max_m and max_n must be >= 1".into()));
    }
    config.walk.validate()?;
    let per_seed: Vec<ScalingResults> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<_>>()?;
    let mut out = ScalingResults::default();
    for r in per_seed {
        out.states.extend(r.states);
        out.windows.extend(r.windows);
    }
    Ok(out)
}

/// Mean and sample standard deviation over seeds for each (size, strategy).
pub fn summarize(rows: &[ScalingRow]) -> Vec<ScalingSummary> {
    let mut keys: Vec<(Strategy, usize)> = rows.iter().map(|r| (r.strategy, r.size)).collect();
    keys.sort_by_key(|&(s, size)| (s.name(), size));
    keys.dedup();
    keys.into_iter()
        .map(|(strategy, size)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.size == size)
                .map(|r| r.jsd)
                .collect();
            let runs = values.len();
            let mean = values.iter().sum::<f64>() / runs as f64;
            let std = if runs > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt()
            } else {
                0.0
            };
            ScalingSummary {
                size,
                strategy,
                mean,
                std,
                runs,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_walk_is_constant() {
        let cfg = RandomWalkConfig {
            k: 3,
            steps: 5,
            v: 0.0,
            sigma: 0.0,
            seed: 7,
        };
        let ds = generate_random_walks(&cfg).unwrap();
        assert_eq!(ds.len(), 12);
        for r in ds.records() {
            assert_eq!(Some(r.state.as_slice()), r.successor.state());
        }
    }

    #[test]
    fn changepoint_bounds() {
        let cfg = RandomWalkConfig { k: 10, ..Default::default() };
        assert!(generate_changepoint_walks(&cfg, 1).is_err());
        assert!(generate_changepoint_walks(&cfg, 11).is_err());
        assert!(generate_changepoint_walks(&cfg, 10).is_ok());
    }

    #[test]
    fn summary_statistics() {
        let rows = [1.0, 3.0].map(|jsd| ScalingRow {
            size: 2,
            strategy: Strategy::Greedy,
            seed: 0,
            jsd,
        });
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean, 2.0);
        assert!((s[0].std - 2f64.sqrt()).abs() < 1e-15);
    }
}
