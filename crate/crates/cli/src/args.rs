//! Command-line flags and the optional TOML config file. Flags take
//! precedence over file values, which take precedence over defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use csta::{PriorMode, ThresholdMode};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "csta", version, about = "Contrastive spatiotemporal abstraction of Markov chain sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a state and temporal abstraction and write the model and summaries.
    Abstract(AbstractArgs),
    /// Posterior series, prototypes and counterfactuals from a saved model.
    Analyze(AnalyzeArgs),
    /// Write a synthetic random-walk dataset.
    Generate(GenerateArgs),
    /// JSD against abstraction size for greedy and random splitting.
    Scaling(ScalingArgs),
}

fn parse_threshold_mode(s: &str) -> std::result::Result<ThresholdMode, String> {
    match s {
        "grid" => Ok(ThresholdMode::Grid),
        "values" => Ok(ThresholdMode::Values),
        "percentiles" => Ok(ThresholdMode::Percentiles),
        _ => Err(format!("unknown threshold mode {s:?} (grid, values, percentiles)")),
    }
}

fn parse_prior(s: &str) -> std::result::Result<PriorMode, String> {
    match s {
        "counts" => Ok(PriorMode::Counts),
        "uniform" => Ok(PriorMode::Uniform),
        _ => Err(format!("unknown prior {s:?} (counts, uniform)")),
    }
}

#[derive(Debug, Args)]
pub struct AbstractArgs {
    /// Dataset file (.csv, or .jsonl for JSON lines).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file with any of the options below, using underscores in keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Minimum window width in chains.
    #[arg(long)]
    pub epsilon: Option<usize>,
    /// Width of the initial windows used during state splitting (1 = one per chain).
    #[arg(long)]
    pub t_init_width: Option<usize>,
    #[arg(long, value_parser = parse_threshold_mode)]
    pub threshold_mode: Option<ThresholdMode>,
    #[arg(long)]
    pub threshold_count: Option<usize>,
    #[arg(long)]
    pub max_states: Option<usize>,
    #[arg(long)]
    pub max_windows: Option<usize>,
    #[arg(long, value_parser = parse_prior)]
    pub prior: Option<PriorMode>,
    /// Comma-separated names of the state dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dim_names: Option<Vec<String>>,
    /// Omit graph edges with joint probability below this value.
    #[arg(long)]
    pub dot_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbstractFile {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    alpha: Option<f64>,
    beta: Option<f64>,
    epsilon: Option<usize>,
    t_init_width: Option<usize>,
    threshold_mode: Option<ThresholdMode>,
    threshold_count: Option<usize>,
    max_states: Option<usize>,
    max_windows: Option<usize>,
    prior: Option<PriorMode>,
    dim_names: Option<Vec<String>>,
    dot_threshold: Option<f64>,
}

/// Fully resolved settings for `abstract`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: usize,
    pub t_init_width: usize,
    pub threshold_mode: ThresholdMode,
    pub threshold_count: usize,
    pub max_states: usize,
    pub max_windows: usize,
    pub prior: PriorMode,
    pub dim_names: Option<Vec<String>>,
    pub dot_threshold: f64,
}

fn load_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())).into())
}

fn required(value: Option<PathBuf>, name: &str) -> Result<PathBuf> {
    value.ok_or_else(|| CliError::Config(format!("--{name} is required (flag or config file)")).into())
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()).into())
    }
}

impl AbstractArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        let file: AbstractFile = load_file(self.config.as_deref())?;
        let cfg = RunConfig {
            input: required(self.input.or(file.input), "input")?,
            output: required(self.output.or(file.output), "output")?,
            alpha: self.alpha.or(file.alpha).unwrap_or(0.05),
            beta: self.beta.or(file.beta).unwrap_or(0.01),
            epsilon: self.epsilon.or(file.epsilon).unwrap_or(15),
            t_init_width: self.t_init_width.or(file.t_init_width).unwrap_or(1),
            threshold_mode: self.threshold_mode.or(file.threshold_mode).unwrap_or(ThresholdMode::Percentiles),
            threshold_count: self.threshold_count.or(file.threshold_count).unwrap_or(19),
            max_states: self.max_states.or(file.max_states).unwrap_or(64),
            max_windows: self.max_windows.or(file.max_windows).unwrap_or(32),
            prior: self.prior.or(file.prior).unwrap_or_default(),
            dim_names: self.dim_names.or(file.dim_names),
            dot_threshold: self.dot_threshold.or(file.dot_threshold).unwrap_or(0.01),
        };
        check(cfg.alpha >= 0.0 && cfg.alpha.is_finite(), "alpha must be finite and >= 0")?;
        check(cfg.beta >= 0.0 && cfg.beta.is_finite(), "beta must be finite and >= 0")?;
        check(cfg.epsilon >= 1, "epsilon must be >= 1")?;
        check(cfg.t_init_width >= 1, "t_init_width must be >= 1")?;
        check(
            cfg.threshold_mode == ThresholdMode::Values || cfg.threshold_count >= 1,
            "threshold_count must be >= 1",
        )?;
        check(cfg.max_states >= 1 && cfg.max_windows >= 1, "max_states and max_windows must be >= 1")?;
        check(
            cfg.dot_threshold >= 0.0 && cfg.dot_threshold.is_finite(),
            "dot_threshold must be finite and >= 0",
        )?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// model.json written by `abstract`.
    #[arg(long)]
    pub model: PathBuf,
    /// The dataset the model was learned from.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// 1-based episode number in file order; repeatable.
    #[arg(long = "episode")]
    pub episodes: Vec<usize>,
    /// 1-based window number for a prototype; repeatable.
    #[arg(long = "window")]
    pub windows: Vec<usize>,
    /// 0-based timestep for a counterfactual review of each selected episode.
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Dataset file to write (.csv or .jsonl).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of chains.
    #[arg(long)]
    pub k: Option<usize>,
    /// States per trajectory.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Plant a reversal of the drift at this chain.
    #[arg(long)]
    pub change_point: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateFile {
    output: Option<PathBuf>,
    k: Option<usize>,
    steps: Option<usize>,
    v: Option<f64>,
    sigma: Option<f64>,
    seed: Option<u64>,
    change_point: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateConfig {
    pub output: PathBuf,
    pub walk: csta::synth::RandomWalkConfig,
    pub change_point: Option<usize>,
}

impl GenerateArgs {
    pub fn resolve(self) -> Result<GenerateConfig> {
        let file: GenerateFile = load_file(self.config.as_deref())?;
        let d = csta::synth::RandomWalkConfig::default();
        let walk = csta::synth::RandomWalkConfig {
            k: self.k.or(file.k).unwrap_or(d.k),
            steps: self.steps.or(file.steps).unwrap_or(d.steps),
            v: self.v.or(file.v).unwrap_or(d.v),
            sigma: self.sigma.or(file.sigma).unwrap_or(d.sigma),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
        };
        walk.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(GenerateConfig {
            output: required(self.output.or(file.output), "output")?,
            walk,
            change_point: self.change_point.or(file.change_point),
        })
    }
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated mean speeds.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
    /// Comma-separated noise levels; every (v, sigma) pair is run.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Number of seeds, run as 0..seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub max_m: Option<usize>,
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Grid thresholds per dimension.
    #[arg(long)]
    pub thresholds: Option<usize>,
    /// Greedy state count used for the window curve.
    #[arg(long)]
    pub states_for_windows: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingFile {
    output: Option<PathBuf>,
    k: Option<usize>,
    steps: Option<usize>,
    v: Option<Vec<f64>>,
    sigma: Option<Vec<f64>>,
    seeds: Option<u64>,
    max_m: Option<usize>,
    max_n: Option<usize>,
    thresholds: Option<usize>,
    states_for_windows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRun {
    pub output: PathBuf,
    /// One experiment per (v, sigma).
    pub settings: Vec<(f64, f64)>,
    pub base: csta::synth::ScalingConfig,
}

impl ScalingArgs {
    pub fn resolve(self) -> Result<ScalingRun> {
        let file: ScalingFile = load_file(self.config.as_deref())?;
        let d = csta::synth::ScalingConfig::default();
        let defaults = csta::synth::default_walk_settings();
        let (v, sigma) = (self.v.or(file.v), self.sigma.or(file.sigma));
        let settings = match (v, sigma) {
            (None, None) => defaults,
            (v, sigma) => {
                let vs = v.unwrap_or_else(|| vec![0.02, 0.05]);
                let ss = sigma.unwrap_or_else(|| vec![0.01, 0.05]);
                vs.iter().flat_map(|&v| ss.iter().map(move |&s| (v, s))).collect()
            }
        };
        let seeds = self.seeds.or(file.seeds).unwrap_or(d.seeds.len() as u64);
        check(seeds >= 1, "seeds must be >= 1")?;
        let base = csta::synth::ScalingConfig {
            walk: csta::synth::RandomWalkConfig {
                k: self.k.or(file.k).unwrap_or(d.walk.k),
                steps: self.steps.or(file.steps).unwrap_or(d.walk.steps),
                ..d.walk
            },
            seeds: (0..seeds).collect(),
            max_m: self.max_m.or(file.max_m).unwrap_or(d.max_m),
            max_n: self.max_n.or(file.max_n).unwrap_or(d.max_n),
            thresholds: self.thresholds.or(file.thresholds).unwrap_or(d.thresholds),
            states_for_windows: self.states_for_windows.or(file.states_for_windows).unwrap_or(d.states_for_windows),
        };
        check(base.max_m >= 1 && base.max_n >= 1, "max_m and max_n must be >= 1")?;
        check(base.thresholds >= 1, "thresholds must be >= 1")?;
        for &(v, s) in &settings {
            csta::synth::RandomWalkConfig { v, sigma: s, ..base.walk }
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(ScalingRun {
            output: required(self.output.or(file.output), "output")?,
            settings,
            base,
        })
    }
}
