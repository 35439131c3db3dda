use std::io;

/// Errors raised by the linear algebra kernels, the updating schemes and the
/// file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("columns are not orthonormal (max |QᵀQ - I| = {0:e})")]
    NotOrthonormal(f64),

    #[error("not a selection matrix: {0}")]
    NotSelection(String),

    #[error("dense SVD did not converge")]
    NoConvergence,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
