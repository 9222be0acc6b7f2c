use std::path::PathBuf;

use reach_core::ReachError;

/// Everything a subcommand can fail with, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or a malformed input file the user supplied.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] ReachError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A verification run found a case outside tolerance.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Engine(_) | CliError::Write { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
