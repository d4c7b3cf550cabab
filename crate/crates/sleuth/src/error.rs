use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SleuthError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: cascade {index}: {message}")]
    Cascade { path: PathBuf, index: usize, message: String },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] cascade_sleuth_core::Error),
    #[error("{0}")]
    Experiment(String),
}

pub type Result<T, E = SleuthError> = std::result::Result<T, E>;

impl SleuthError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SleuthError::Io { path: path.into(), source }
    }
}
