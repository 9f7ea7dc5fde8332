use thiserror::Error;

/// Errors raised by the expansion library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The model violates an assumption of the method (ellipticity, SPD covariance, ...).
    #[error("model rejected: {0}")]
    ModelRejected(String),

    #[error("coefficient derivatives of order {requested} requested, model declares {available}")]
    InsufficientDerivativeOrder { requested: usize, available: usize },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
