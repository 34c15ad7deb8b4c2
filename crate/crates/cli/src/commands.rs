//! Subcommand implementations. Each command renders all of its files in
//! memory first and writes them only once every step has succeeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use csta::analysis::{
    counterfactual_review, episode_log_posterior_series, episode_traces, mean_log_likelihood, prototype_episode,
    semantic_key,
};
use csta::synth::{generate_changepoint_walks, generate_random_walks, scaling_experiment, summarize, ScalingRow};
use csta::{run_csta, CandidateThresholds, CstaConfig, Prior, TemporalAbstraction};

use crate::args::{GenerateConfig, RunConfig, ScalingRun};
use crate::error::CliError;
use crate::export;
use crate::io::{format_dataset, read_dataset};
use crate::model::{round12, ModelConfig, ModelFile};

/// Named file contents, relative to an output directory.
pub type Outputs = Vec<(PathBuf, String)>;

pub fn write_outputs(dir: &Path, files: &Outputs) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn default_names(dim: usize) -> Vec<String> {
    match dim {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=dim).map(|d| format!("s{d}")).collect(),
    }
}

pub fn abstract_outputs(cfg: &RunConfig) -> Result<Outputs> {
    let dataset = read_dataset(&cfg.input)?;
    let names = cfg.dim_names.clone().unwrap_or_else(|| default_names(dataset.dim()));
    if names.len() != dataset.dim() {
        return Err(CliError::Config(format!(
            "{} dimension names given for {}-dimensional states",
            names.len(),
            dataset.dim()
        ))
        .into());
    }
    let prior = Prior::from_mode(&dataset, cfg.prior)?;
    let t_init = TemporalAbstraction::uniform(dataset.k(), cfg.t_init_width)?;
    let cands = CandidateThresholds::from_data(&dataset, cfg.threshold_mode, cfg.threshold_count)?;
    let config = CstaConfig {
        alpha: cfg.alpha,
        beta: cfg.beta,
        epsilon: cfg.epsilon,
        max_states: cfg.max_states,
        max_windows: cfg.max_windows,
    };
    let result = run_csta(&dataset, &prior, &t_init, &cands, None, &config)?;

    let model = ModelFile::from_result(
        &result,
        ModelConfig {
            alpha: cfg.alpha,
            beta: cfg.beta,
            epsilon: cfg.epsilon,
            max_states: cfg.max_states,
            max_windows: cfg.max_windows,
            t_init_width: cfg.t_init_width,
            threshold_mode: cfg.threshold_mode,
            threshold_count: cfg.threshold_count,
            prior: cfg.prior,
            dim_names: names.clone(),
        },
    );
    let labels = semantic_key(&result.abstraction, &names)?;
    let mut files: Outputs = vec![
        ("model.json".into(), model.to_json()),
        ("tree.txt".into(), export::tree_text(&result.abstraction, &names)),
        ("visitation.csv".into(), export::visitation_csv(&result)),
        ("semantic_key.txt".into(), export::semantic_key_text(&result.abstraction, &labels)),
    ];
    for w in 0..result.n() {
        files.push((
            format!("graph_w{}.dot", w + 1).into(),
            export::graph_dot(&result, w, cfg.dot_threshold),
        ));
    }
    for x in 0..result.abstraction.size() {
        let label = crate::model::state_label(&result.abstraction, x);
        files.push((format!("outbound_x{label}.csv").into(), export::outbound_csv(&result, x)));
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeRequest {
    pub model: PathBuf,
    pub input: PathBuf,
    /// 1-based episode numbers.
    pub episodes: Vec<usize>,
    /// 1-based window numbers.
    pub windows: Vec<usize>,
    pub t: Option<usize>,
}

pub fn analyze_outputs(req: &AnalyzeRequest) -> Result<Outputs> {
    if req.episodes.is_empty() && req.windows.is_empty() {
        return Err(CliError::Selection("select at least one --episode or --window".into()).into());
    }
    if req.t.is_some() && req.episodes.is_empty() {
        return Err(CliError::Selection("--t requires at least one --episode".into()).into());
    }
    let text = std::fs::read_to_string(&req.model).with_context(|| format!("reading {}", req.model.display()))?;
    let model = ModelFile::from_json(&text)?;
    let result = model.to_result()?;
    let dataset = read_dataset(&req.input)?;
    if dataset.dim() != model.dim || dataset.k() != model.k {
        return Err(CliError::Model(format!(
            "model expects {} chains of {}-dimensional states, dataset has {} chains of {}",
            model.k,
            model.dim,
            dataset.k(),
            dataset.dim()
        ))
        .into());
    }
    if dataset.has_terminal() && !model.terminal {
        return Err(CliError::Model("dataset has terminal transitions but the model has no terminal state".into()).into());
    }
    let traces = episode_traces(&dataset, &result.abstraction)?;

    let mut files = Outputs::new();
    for &w in &req.windows {
        if w == 0 || w > result.n() {
            return Err(CliError::Selection(format!("window {w} out of range 1..={}", result.n())).into());
        }
        let idx = prototype_episode(&result, &traces, w - 1)?;
        let score = mean_log_likelihood(&result, &traces[idx], w - 1);
        files.push((
            format!("prototype_w{w}.csv").into(),
            export::prototype_csv(&result, &dataset, idx, &traces[idx], score),
        ));
    }
    for &i in &req.episodes {
        if i == 0 || i > traces.len() {
            return Err(CliError::Selection(format!("episode {i} out of range 1..={}", traces.len())).into());
        }
        let trace = &traces[i - 1];
        let series = episode_log_posterior_series(&result, trace)?;
        files.push((
            format!("posterior_ep{i}.csv").into(),
            export::posterior_csv(&result, trace, &series),
        ));
        if let Some(t) = req.t {
            if t >= trace.len() {
                return Err(CliError::Selection(format!(
                    "t = {t} is beyond episode {i}, which has {} transitions",
                    trace.len()
                ))
                .into());
            }
            let review = counterfactual_review(&result, trace, t)?;
            files.push((
                format!("counterfactual_ep{i}_t{t}.csv").into(),
                export::counterfactual_csv(&result, &review),
            ));
        }
    }
    Ok(files)
}

#[derive(Serialize)]
struct GenerateMeta {
    generator: &'static str,
    k: usize,
    steps: usize,
    v: f64,
    sigma: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_star: Option<usize>,
    transitions: usize,
}

/// Path of the metadata written next to a generated dataset.
pub fn meta_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

pub fn generate_outputs(cfg: &GenerateConfig) -> Result<Outputs> {
    let dataset = match cfg.change_point {
        Some(i) => generate_changepoint_walks(&cfg.walk, i).map_err(|e| CliError::Config(e.to_string()))?,
        None => generate_random_walks(&cfg.walk)?,
    };
    let meta = GenerateMeta {
        generator: if cfg.change_point.is_some() {
            "changepoint_walk"
        } else {
            "random_walk"
        },
        k: cfg.walk.k,
        steps: cfg.walk.steps,
        v: cfg.walk.v,
        sigma: cfg.walk.sigma,
        seed: cfg.walk.seed,
        i_star: cfg.change_point,
        transitions: dataset.len(),
    };
    let mut meta_json = serde_json::to_string_pretty(&meta)?;
    meta_json.push('\n');
    Ok(vec![
        (cfg.output.clone(), format_dataset(&dataset, &cfg.output)),
        (meta_path(&cfg.output), meta_json),
    ])
}

fn rows_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("size,strategy,seed,jsd\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.size, r.strategy.name(), r.seed, round12(r.jsd)).unwrap();
    }
    out
}

pub fn scaling_outputs(run: &ScalingRun) -> Result<Outputs> {
    let mut files = Outputs::new();
    let mut summary = String::from("axis,v,sigma,size,strategy,mean,std,runs\n");
    for &(v, sigma) in &run.settings {
        let mut config = run.base.clone();
        config.walk.v = v;
        config.walk.sigma = sigma;
        let results = scaling_experiment(&config)?;
        let tag = format!("v{v}_sigma{sigma}");
        for (axis, rows) in [("m", &results.states), ("n", &results.windows)] {
            files.push((format!("scaling_{axis}_{tag}.csv").into(), rows_csv(rows)));
            for s in summarize(rows) {
                writeln!(
                    summary,
                    "{axis},{v},{sigma},{},{},{},{},{}",
                    s.size,
                    s.strategy.name(),
                    round12(s.mean),
                    round12(s.std),
                    s.runs
                )
                .unwrap();
            }
        }
    }
    files.push(("scaling_summary.csv".into(), summary));
    Ok(files)
}
