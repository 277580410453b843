use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("checks failed: {}", .0.join(", "))]
    CheckFailed(Vec<String>),

    #[error("restoration diverged after t = {last_good_t}; partial output in {}", .partial.display())]
    Diverged { last_good_t: f64, partial: PathBuf },

    #[error(transparent)]
    Core(#[from] contractive_core::Error),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Diverged { .. } => 3,
            CliError::Core(contractive_core::Error::InvalidParams(_)) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
