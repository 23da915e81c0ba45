use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SdeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SdeError {
    /// A query fell outside the domain of a path or function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The noise specification is inconsistent (e.g. zero intensity bound with
    /// a non-zero intensity).
    #[error("invalid noise specification: {0}")]
    Spec(String),

    #[error("coefficient evaluation failed at t = {t} (replication {replication}): {message}")]
    Model { t: f64, replication: u64, message: String },

    #[error("trajectory exceeded explosion bound {bound} at t = {t} (replication {replication})")]
    Exploded { t: f64, bound: f64, replication: u64 },

    #[error("ensemble rejected: {0}")]
    Rejected(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SdeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SdeError::Io {
            path: path.into(),
            source,
        }
    }
}
