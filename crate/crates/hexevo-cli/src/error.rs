//! Error taxonomy mapped onto process exit codes.

use std::fmt;

/// A failed command, carrying the exit code contract:
/// 1 = configuration error, 2 = runtime failure, 3 = partial run needs
/// resume (also used when a run is interrupted mid-way).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    NeedsResume(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::NeedsResume(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::NeedsResume(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// IO failures are runtime errors with the path in the message.
pub fn io_err(context: &str, path: &std::path::Path, err: std::io::Error) -> CliError {
    CliError::Runtime(format!("{context} {}: {err}", path.display()))
}
