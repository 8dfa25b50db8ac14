use thiserror::Error;

/// Errors raised by the algebraic and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for rank n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("degenerate comparison: both matrices are zero")]
    DegenerateComparison,

    #[error("cannot normalize a zero matrix")]
    ZeroMatrix,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("no unique solution: nullspace dimension {0}")]
    NotUnique(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
