//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point ({x}, {y}) is outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("singular kernel evaluation: {0}")]
    Singularity(String),

    #[error("interval ordering violated: {0}")]
    Ordering(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver failure at step {step}: {detail} (achieved residual {residual:.3e})")]
    SolverFailure {
        step: usize,
        detail: String,
        residual: f64,
    },

    #[error("mesh file: {0}")]
    MeshFile(String),

    #[error("estimated cost {estimate:.2e} exceeds the configured ceiling {ceiling:.2e}; {hint}")]
    ResourceLimit {
        estimate: f64,
        ceiling: f64,
        hint: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
