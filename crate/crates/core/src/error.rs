use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum GboError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate graph {0}: zero self-kernel")]
    DegenerateGraph(String),

    #[error("gram matrix is ill-conditioned (jitter up to {max_jitter:e} failed)")]
    IllConditioned { max_jitter: f64 },

    #[error("hyperparameter fitting failed: {0}")]
    Fitting(String),

    #[error("value {value} outside domain: {reason}")]
    Domain { value: f64, reason: String },

    #[error("candidate set exhausted")]
    Exhausted,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("origin {origin} cannot reach destination {destination}")]
    Infeasible { origin: usize, destination: usize },

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GboError> = std::result::Result<T, E>;

impl GboError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        GboError::Parameter(msg.into())
    }
}
