use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported sphere dimension n = {0} (only n = 1 and n = 2 are supported here)")]
    UnsupportedDimension(usize),

    #[error("basis index {index} out of range for degree {ell} (dimension {dim})")]
    IndexOutOfRange { ell: usize, index: usize, dim: usize },

    #[error("harmonic degree {ell} is not admissible for degree {d}: need ell <= d and d - ell even")]
    Parity { d: usize, ell: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resolution insufficient: {0}")]
    Resolution(String),

    #[error("basepoint too close to the zero set (distance {distance:.3e}, need > {required:.3e})")]
    Basepoint { distance: f64, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
