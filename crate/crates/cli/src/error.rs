use std::fmt::Display;

use thiserror::Error;

/// Failure classes with their exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file, or missing referenced files (exit 1).
    #[error("{0}")]
    Config(String),
    /// Malformed input records or failures while processing them (exit 2).
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

pub fn config(e: impl Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn data(e: impl Display) -> CliError {
    CliError::Data(e.to_string())
}

impl From<taxonomy_forge::Error> for CliError {
    fn from(e: taxonomy_forge::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
