//! CLI error kinds mapped onto the documented process exit codes.

use std::fmt;

/// Exit codes: 0 success, 2 configuration error, 3 solver/runtime failure,
/// 4 tolerance failure in an oracle comparison.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or invalid configuration (exit 2).
    Config(String),
    /// Solver or I/O failure while running a valid scenario (exit 3).
    Solver(String),
    /// An oracle comparison exceeded its configured tolerance (exit 4).
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Tolerance(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<iohoem_core::CoreError> for CliError {
    fn from(e: iohoem_core::CoreError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Solver(format!("I/O: {e}"))
    }
}
