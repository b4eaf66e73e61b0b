use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates one of the scenario invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The artificial-noise null constraint needs at least two cooperating users.
    #[error("artificial noise requires m_users >= 2, got {0}")]
    ArtificialNoiseUsers(usize),

    #[error("subset expansion supports 1..=24 eavesdroppers, got {0}")]
    SubsetCount(usize),

    #[error("{operation} requires m_users = 1, got {got}")]
    SingleUserOnly { operation: &'static str, got: usize },

    #[error("diversity fit: {0}")]
    Fit(String),

    #[error("grid point {index}: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
