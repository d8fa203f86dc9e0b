use std::path::Path;

use chshq::ErrorKind;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const INVALID_INPUT: i32 = 2;
    pub const INVARIANT_VIOLATION: i32 = 3;
    pub const CAP_EXCEEDED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chshq::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("could not render output: {0}")]
    Output(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::InvalidInput => exit::INVALID_INPUT,
                ErrorKind::InvariantViolation => exit::INVARIANT_VIOLATION,
                ErrorKind::CapExceeded => exit::CAP_EXCEEDED,
            },
            CliError::Usage(_) | CliError::Parse(_) => exit::INVALID_INPUT,
            CliError::Io { .. } | CliError::Output(_) => exit::IO,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_failure_class_has_its_own_code() {
        let codes = [
            CliError::from(chshq::Error::InvalidInput("x".into())).exit_code(),
            CliError::from(chshq::Error::InvariantViolation("x".into())).exit_code(),
            CliError::from(chshq::Error::CapExceeded("x".into())).exit_code(),
            CliError::io("f", std::io::Error::other("x")).exit_code(),
        ];
        assert_eq!(codes, [exit::INVALID_INPUT, exit::INVARIANT_VIOLATION, exit::CAP_EXCEEDED, exit::IO]);
        assert_eq!(CliError::Parse("x".into()).exit_code(), exit::INVALID_INPUT);
    }
}
