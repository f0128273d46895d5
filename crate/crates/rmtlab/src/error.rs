use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("evaluation point coincides with atom {index}")]
    AtomCollision { index: usize },

    #[error("atoms {first} and {second} coincide")]
    DuplicateAtoms { first: usize, second: usize },

    #[error("matrix is rank deficient (smallest singular value {s_min:e})")]
    RankDeficient { s_min: f64 },

    /// Carries the nearest sparse vector certifying compressibility.
    #[error("vector is compressible: distance {distance:e} to a sparse approximant")]
    Compressible { approximant: Vec<Complex64>, distance: f64 },

    #[error("root is not bracketed: {0}")]
    NotBracketed(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("numerical fault: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
