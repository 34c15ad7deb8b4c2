//! The self-contained `model.json` written by `abstract` and read by `analyze`.
//!
//! Probabilities and objective values are rounded to 12 significant digits.
//! Split thresholds are stored exactly so that state assignment is reproduced.
//! Reading a model and writing it back yields identical bytes.

use anyhow::Result;
use serde::{Deserialize, Serialize};

use csta::{
    AbstractionResult, ConditionalTensor, CstaConfig, JointTensor, Prior, PriorMode, SplitTree, StateAbstraction,
    TemporalAbstraction, ThresholdMode,
};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn round_all(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| round12(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub id: String,
    /// `[lower, upper)` per dimension; `null` for an infinite bound.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateStep {
    pub state: String,
    pub dim: usize,
    pub threshold: f64,
    pub gain: f64,
    pub jsd: f64,
    pub objective: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStep {
    pub window: usize,
    pub cut: usize,
    pub gain: f64,
    pub jsd: f64,
    pub objective: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<S> {
    pub initial_jsd: f64,
    pub steps: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: usize,
    pub max_states: usize,
    pub max_windows: usize,
    pub t_init_width: usize,
    pub threshold_mode: ThresholdMode,
    pub threshold_count: usize,
    pub prior: PriorMode,
    pub dim_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub dim: usize,
    pub k: usize,
    pub terminal: bool,
    pub m: usize,
    pub n: usize,
    pub jsd: f64,
    pub objective: f64,
    pub states: Vec<StateEntry>,
    pub tree: SplitTree,
    /// Windows `[l, u)` over 1-based chain indices.
    pub windows: Vec<(usize, usize)>,
    pub t_init: Vec<(usize, usize)>,
    pub prior: Vec<f64>,
    pub window_prior: Vec<f64>,
    pub joint: Tensor,
    pub conditional: Tensor,
    pub state_trace: Trace<StateStep>,
    pub temporal_trace: Trace<WindowStep>,
    pub config: ModelConfig,
}

/// 1-based label of abstract state `x`; the terminal state is `te`.
pub fn state_label(abstraction: &StateAbstraction, x: usize) -> String {
    if abstraction.terminal_index() == Some(x) {
        "te".to_string()
    } else {
        (x + 1).to_string()
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ModelFile {
    pub fn from_result(result: &AbstractionResult, config: ModelConfig) -> Self {
        let abstraction = &result.abstraction;
        let size = abstraction.size();
        let n = result.n();
        let states = abstraction
            .states()
            .iter()
            .enumerate()
            .map(|(x, rect)| StateEntry {
                id: state_label(abstraction, x),
                bounds: rect.bounds.iter().map(|&(lo, hi)| (finite(lo), finite(hi))).collect(),
            })
            .collect();
        let state_steps = result
            .state_trace
            .iter()
            .map(|s| StateStep {
                state: state_label(abstraction, s.state),
                dim: s.dim + 1,
                threshold: s.threshold,
                gain: round12(s.gain),
                jsd: round12(s.jsd_after),
                objective: round12(s.objective),
                m: s.m,
            })
            .collect();
        let window_steps = result
            .temporal_trace
            .iter()
            .map(|s| WindowStep {
                window: s.window + 1,
                cut: s.cut,
                gain: round12(s.gain),
                jsd: round12(s.jsd_after),
                objective: round12(s.objective),
                n: s.n,
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            dim: abstraction.dim(),
            k: result.windows.k(),
            terminal: abstraction.has_terminal(),
            m: abstraction.m(),
            n,
            jsd: round12(result.jsd()),
            objective: round12(result.objective()),
            states,
            tree: abstraction.tree().clone(),
            windows: result.windows.windows().to_vec(),
            t_init: result.t_init.windows().to_vec(),
            prior: round_all(result.prior.weights()),
            window_prior: round_all(result.joint.weights()),
            joint: Tensor {
                shape: [n, size, size],
                data: round_all(result.joint.as_slice()),
            },
            conditional: Tensor {
                shape: [n, size, size],
                data: round_all(result.conditional.as_slice()),
            },
            state_trace: Trace {
                initial_jsd: round12(result.state_initial_jsd),
                steps: state_steps,
            },
            temporal_trace: Trace {
                initial_jsd: round12(result.temporal_initial_jsd),
                steps: window_steps,
            },
            config,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Model(e.to_string()))?;
        if model.format_version != FORMAT_VERSION {
            return Err(CliError::Model(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                model.format_version
            ))
            .into());
        }
        Ok(model)
    }

    /// Rebuilds the in-memory result; traces are not needed for analysis and are left empty.
    pub fn to_result(&self) -> Result<AbstractionResult> {
        let model_err = |e: csta::Error| CliError::Model(e.to_string());
        let abstraction = StateAbstraction::from_tree(self.dim, self.terminal, self.tree.clone()).map_err(model_err)?;
        let size = abstraction.size();
        if abstraction.m() != self.m || self.windows.len() != self.n {
            return Err(CliError::Model("state or window count disagrees with tree and windows".into()).into());
        }
        let shape = [self.n, size, size];
        if self.joint.shape != shape || self.conditional.shape != shape {
            return Err(CliError::Model(format!("tensor shape must be {shape:?}")).into());
        }
        let windows = TemporalAbstraction::new(self.windows.clone(), self.k).map_err(model_err)?;
        let t_init = TemporalAbstraction::new(self.t_init.clone(), self.k).map_err(model_err)?;
        let prior = Prior::normalized(self.prior.clone()).map_err(model_err)?;
        let joint = JointTensor::new(self.n, size, self.joint.data.clone(), self.window_prior.clone()).map_err(model_err)?;
        let conditional = ConditionalTensor::new(self.n, size, self.conditional.data.clone()).map_err(model_err)?;
        Ok(AbstractionResult {
            abstraction,
            windows,
            t_init,
            joint,
            conditional,
            prior,
            config: CstaConfig {
                alpha: self.config.alpha,
                beta: self.config.beta,
                epsilon: self.config.epsilon,
                max_states: self.config.max_states,
                max_windows: self.config.max_windows,
            },
            state_initial_jsd: self.state_trace.initial_jsd,
            state_trace: Vec::new(),
            temporal_initial_jsd: self.temporal_trace.initial_jsd,
            temporal_trace: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_idempotent() {
        for v in [1.0 / 3.0, 0.1 + 0.2, 123456.7890123456, 1e-300, 0.0] {
            let r = round12(v);
            assert_eq!(round12(r), r);
            assert!((r - v).abs() <= v.abs() * 1e-11);
        }
        assert_eq!(round12(1.0 / 3.0).to_string(), "0.333333333333");
    }
}
