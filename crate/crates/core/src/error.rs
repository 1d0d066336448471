use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n_points must be even (got {0})")]
    OddPoints(usize),

    #[error("n_points must be at least 16 (got {0})")]
    TooFewPoints(usize),

    #[error("domain length must be positive and finite (got {0})")]
    BadLength(f64),

    #[error("non-finite sample at node {node} (x = {x})")]
    NonFiniteSample { node: usize, x: f64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("symbol is not conjugate-symmetric at wavenumber index {index}")]
    NonHermitianSymbol { index: usize },

    #[error("division by zero shift")]
    ZeroShift,

    #[error("non-finite integrand at alpha = {alpha}")]
    NonFiniteIntegrand { alpha: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
