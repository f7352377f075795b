use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution {got}: expected {min}..={max}")]
    InvalidResolution { got: usize, min: usize, max: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate capacity: {0}")]
    DegenerateCapacity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
