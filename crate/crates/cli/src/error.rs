//! Process-level error classification mapped onto exit codes.

use std::fmt;

/// Exit code 1: configuration problems. Exit code 2: runtime failures.
/// Exit code 3: a sweep that completed with some failed cells.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    PartialSweep { failed: usize, total: usize },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::PartialSweep { .. } => 3,
        }
    }

    /// Label a core-library failure with its pipeline stage.
    pub fn stage(stage: &str, err: mlcs_core::Error) -> CliError {
        CliError::Runtime(format!("{stage}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
            CliError::PartialSweep { failed, total } => {
                write!(f, "sweep finished with {failed}/{total} failed runs")
            }
        }
    }
}

impl std::error::Error for CliError {}
