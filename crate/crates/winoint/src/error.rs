//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by tensor IO, transforms, and the convolution engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed tensor header: {0}")]
    MalformedHeader(String),

    #[error("unknown dtype {0:?} (expected \"u8\" or \"i32\")")]
    UnknownDtype(String),

    #[error("data length mismatch: header declares {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("wrong dtype: expected {expected}, got {got}")]
    WrongDtype {
        expected: &'static str,
        got: &'static str,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("input too small: spatial {h}x{w} plus 2*{padding} padding is below tile side {tile}")]
    InputTooSmall {
        h: usize,
        w: usize,
        padding: usize,
        tile: usize,
    },

    #[error("value out of range: {0}")]
    ValueOutOfRange(String),

    #[error("unknown algorithm {0:?} (expected rat2x2, rat4x4 or cplx4x4)")]
    UnknownAlgorithm(String),

    #[error("conjugate layout violation: {0}")]
    LayoutViolation(String),

    #[error("inexact division: {value} is not divisible by {divisor}")]
    DivisibilityViolation { value: i64, divisor: i64 },

    #[error("accumulator holds no channels")]
    EmptyAccumulator,

    #[error("empty weight population")]
    EmptyPopulation,

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
}

pub type Result<T> = std::result::Result<T, Error>;
