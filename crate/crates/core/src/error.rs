use thiserror::Error;

use crate::grid::GridDims;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid {n_rows}x{n_cols}: {reason}")]
    InvalidGrid {
        n_rows: usize,
        n_cols: usize,
        reason: &'static str,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(GridDims, GridDims),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("frequency ({row}, {col}) outside grid {dims}")]
    OutOfRangeFrequency { row: usize, col: usize, dims: GridDims },
    #[error("frequency ({row}, {col}) listed twice")]
    DuplicateFrequency { row: usize, col: usize },
    #[error("factor {m} does not divide {n_rows} rows")]
    NonDivisorFactor { m: usize, n_rows: usize },
    #[error("support mask is empty")]
    EmptySupport,
    #[error("sampling pattern does not match the decomposition: {0}")]
    PatternMismatch(String),
    #[error("multi-coil data given to a single-coil reconstruction")]
    MultiCoilNotAllowed,
    #[error("coil count mismatch: expected {expected}, got {got}")]
    CoilCountMismatch { expected: usize, got: usize },
    #[error("coil sensitivities vanish on the union support")]
    DegenerateCoils,
    #[error("empty input list")]
    EmptyInput,
    #[error("image is identically zero")]
    AllZeroImage,
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("shape {0} extends outside the grid")]
    ShapeOutOfBounds(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
