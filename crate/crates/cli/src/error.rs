//! Error categories surfaced to the user and mapped to exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("selection error: {0}")]
    Selection(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Model(_) => 4,
            CliError::Selection(_) => 5,
        }
    }
}

/// Exit code and category label for any error reaching `main`.
pub fn classify(err: &anyhow::Error) -> (i32, &'static str) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            let label = match e {
                CliError::Config(_) => "config",
                CliError::Input(_) => "input",
                CliError::Model(_) => "model",
                CliError::Selection(_) => "selection",
            };
            return (e.exit_code(), label);
        }
        if let Some(e) = cause.downcast_ref::<csta::Error>() {
            return match e {
                csta::Error::InvalidConfig(_) | csta::Error::InvalidPrior(_) | csta::Error::InvalidWindows(_) => {
                    (2, "config")
                }
                csta::Error::UnknownWindow { .. } | csta::Error::InvalidTimestep { .. } | csta::Error::NoEpisodes(_) => {
                    (5, "selection")
                }
                _ => (3, "input"),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (6, "io");
        }
    }
    (1, "error")
}
