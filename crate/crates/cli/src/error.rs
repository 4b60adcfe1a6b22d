use std::path::Path;

use resegment::formats::FormatError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Malformed(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn format(path: &Path, err: FormatError) -> Self {
        CliError::Malformed(format!("{}: {err}", path.display()))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Malformed(format!("{}: {err}", path.display()))
    }

    pub fn input(err: impl std::fmt::Display) -> Self {
        CliError::Malformed(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
