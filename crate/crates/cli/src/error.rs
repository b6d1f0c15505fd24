use std::fmt;

use irvis_core::FusionError;

/// A failure surfaced to the shell, tagged with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs the command cannot work with.
    Usage(String),
    Io(String),
    /// The optimizer hit a non-finite loss.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        let msg = e.to_string();
        match e {
            FusionError::Read { .. } | FusionError::Write { .. } | FusionError::UnsupportedFormat(_) => {
                CliError::Io(msg)
            }
            FusionError::NonFiniteLoss { .. } => CliError::Numeric(msg),
            _ => CliError::Usage(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
