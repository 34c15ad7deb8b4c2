use thiserror::Error;

/// Errors raised by dataset construction, abstraction search and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dataset contains no transition records")]
    EmptyDataset,

    #[error("dimensionality mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("chain index {chain} outside 1..={k}")]
    ChainOutOfRange { chain: usize, k: usize },

    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid temporal abstraction: {0}")]
    InvalidWindows(String),

    #[error("threshold {threshold} is not strictly inside state {state} on dimension {dim}")]
    InvalidThreshold {
        state: usize,
        dim: usize,
        threshold: f64,
    },

    #[error("cut {cut} is not a valid split of window {window} with minimum width {epsilon}")]
    InvalidCut {
        window: usize,
        cut: usize,
        epsilon: usize,
    },

    #[error("negative probability {0}")]
    NegativeProbability(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("transition {from} -> {to} has zero mass in every slice")]
    ZeroMass { from: usize, to: usize },

    #[error("abstract state {state} does not exist (m' = {size})")]
    UnknownState { state: usize, size: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("timestep {t} outside episode of length {len}")]
    InvalidTimestep { t: usize, len: usize },

    #[error("window {0} contains no episodes")]
    NoEpisodes(usize),

    #[error("unknown window {window} (n = {n})")]
    UnknownWindow { window: usize, n: usize },

    #[error("expected {expected} dimension names, got {found}")]
    NameCountMismatch { expected: usize, found: usize },

    #[error("invalid split tree: {0}")]
    InvalidTree(String),
}

pub type Result<T> = std::result::Result<T, Error>;
