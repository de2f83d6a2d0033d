//! Library surface of the batch front end; `main` is a thin wrapper so the
//! campaign logic stays testable.

pub mod campaign;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Usage or configuration problem: exit code 2.
    #[error("{0}")]
    Config(String),

    /// Runtime failure while executing a scenario: exit code 1.
    #[error(transparent)]
    Core(#[from] symred_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("artifact error: {0}")]
    Artifact(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Artifact(_) => 2,
            _ => 1,
        }
    }
}
