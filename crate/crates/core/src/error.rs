use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("iterative eigensolver failed to converge")]
    NonConvergence,

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix {0} is not positive definite")]
    NotPd(String),

    #[error("matrix {0} is not symmetric")]
    NotSymmetric(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadratic pencil K(mu) is not positive definite at mu = {mu}")]
    PencilNotPd { mu: f64 },

    #[error("shifted damping 2 mu M + C is indefinite at mu = {mu}")]
    DampingIndefinite { mu: f64 },

    #[error("shift mu = {mu} is outside the admissible range (gamma, 0]")]
    ShiftOutOfRange { mu: f64 },

    #[error("the shift must be nonzero")]
    ZeroShift,

    #[error("no decay bound available: gamma0 = {gamma0:e} is numerically zero")]
    NoDecayBound { gamma0: f64 },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("matrix is singular")]
    Singular,

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("damping coefficient must be positive, got {0}")]
    NonPositiveDamping(f64),

    #[error("invalid shift for the wave bound: {0}")]
    InvalidShift(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
