use alloc::string::String;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("expected {expected} entries, got {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("matrix has no rows or no columns")]
    Empty,

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("not a rank-one projector: {reason} (deviation {deviation:e})")]
    NotProjector { reason: &'static str, deviation: f64 },

    #[error("projectors do not form a context: {reason} (deviation {deviation:e})")]
    InvalidContext { reason: &'static str, deviation: f64 },

    #[error("not a density operator: {reason} (deviation {deviation:e})")]
    NotDensity { reason: &'static str, deviation: f64 },

    #[error("matrix is not stochastic (deviation {0:e})")]
    NotStochastic(f64),

    #[error("matrix is not bistochastic (column-sum deviation {0:e})")]
    NotBistochastic(f64),

    #[error("negative probability {0:e}")]
    NegativeProbability(f64),

    #[error("no convergence after {iterations} iterations (deviation {deviation:e})")]
    Convergence { iterations: usize, deviation: f64 },

    #[error("spin {0} is not supported (expected 1/2 or 1)")]
    UnsupportedSpin(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
