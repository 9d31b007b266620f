//! Error type shared by all learning kernels.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("matrix is malformed: {0}")]
    BadMatrix(String),

    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<V> = std::result::Result<V, MlError>;
