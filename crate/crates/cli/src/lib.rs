//! Command-line front end for `purposedyn`: loads strict JSON scenarios,
//! runs the model and writes CSV/JSON artifacts plus a run manifest.

pub mod commands;
pub mod report;
pub mod scenario;

use purposedyn::ModelError;
use thiserror::Error;

pub use commands::{run, Cli, Command};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioFile};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "PURPOSEDYN_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for bad input, 2 for an infeasible trajectory, 3 for anything
    /// internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Model(ModelError::Infeasible { .. }) => 2,
            CliError::Model(e) if e.is_validation() => 1,
            CliError::Model(_) | CliError::Io(_) => 3,
        }
    }
}
