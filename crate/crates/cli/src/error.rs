use std::fmt::Display;

use ovskale_core::Error as CoreError;
use thiserror::Error;

/// Failure classes of a run, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config<E: Display>(e: E) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io<E: Display>(what: &std::path::Path, e: E) -> Self {
        CliError::Io(format!("{}: {e}", what.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    /// Parameter and shape errors come from the config; the rest are
    /// numerical failures of an admissible run.
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::ShapeMismatch { .. }
            | CoreError::SubsetBlowup { .. }
            | CoreError::DimensionCap { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
