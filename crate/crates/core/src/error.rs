use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the matching pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix size mismatch: expected {expected}x{expected}, found {found}x{found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("matrix is singular (reciprocal condition estimate {rcond:e})")]
    Singular { rcond: f64 },

    #[error("bandwidth exceeded: {0}")]
    BandwidthExceeded(String),

    #[error("point {z} lies outside the guard band of radius {limit}")]
    OutsideGuardBand { z: Complex64, limit: f64 },

    #[error("invalid exponent profile: {0}")]
    InvalidProfile(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("asymptotic series has no coefficients")]
    EmptySeries,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("point {z} lies within the guard band of the jump contour")]
    OnContour { z: Complex64 },

    #[error("condition c >= {threshold} violated (c = {c})")]
    ConditionViolated { threshold: f64, c: f64 },

    #[error("|x - y| = {gap:e} is inside the diagonal band")]
    DiagonalBand { gap: f64 },

    #[error("handle evaluation failed at {z}: {message}")]
    Handle { z: Complex64, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
