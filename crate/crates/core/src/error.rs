use thiserror::Error;

/// Errors produced by the geometry, depth, clustering and validation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero-norm vector cannot be projected onto the sphere{}", .index.map(|i| format!(" (row {i})")).unwrap_or_default())]
    ZeroVector { index: Option<usize> },

    #[error("vector norm {norm} is too far from 1 to be a unit vector")]
    NotUnit { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("degenerate chance adjustment: mean permuted NDC is {mean_ndc}")]
    DegenerateAdjustment { mean_ndc: f64 },

    #[error("constraint for center {center} not satisfied after {attempts} draws")]
    InfeasibleConstraint { center: usize, attempts: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
