//! Contrastive spatiotemporal abstraction of Markov chain sequences.
//!
//! Transition data `(i, s, s')` from `k` chains over a continuous state space
//! are compressed into hyperrectangular abstract states and contiguous
//! temporal windows, both chosen greedily to maximise the Jensen-Shannon
//! divergence between the abstract transition distributions of the slices,
//! minus linear penalties on the number of states (`alpha`) and windows
//! (`beta`).

pub mod abstraction;
pub mod analysis;
pub mod dataset;
pub mod divergence;
pub mod error;
pub mod prior;
pub mod state_split;
pub mod synth;
pub mod tensor;
pub mod thresholds;
pub mod window_split;
pub mod windows;

pub use abstraction::{Hyperrectangle, SplitTree, StateAbstraction, TreeNode};
pub use dataset::{Episode, Successor, TransitionDataset, TransitionRecord};
pub use divergence::{entropy, expected_log_posterior, jsd, objective, ObjectiveConfig};
pub use error::{Error, Result};
pub use prior::{Prior, PriorMode};
pub use state_split::{run_csa, CsaConfig, CsaOutcome, StateSplitSearch};
pub use tensor::{
    aggregate_temporal, compute_counts, joint_probs, marginal_visitation, to_conditional, to_joint,
    ConditionalTensor, CountTensor, JointTensor,
};
pub use thresholds::{CandidateThresholds, ThresholdMode};
pub use window_split::{run_csta, AbstractionResult, CstaConfig};
pub use windows::TemporalAbstraction;
