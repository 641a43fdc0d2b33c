use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("body is unbounded along direction {direction:?}")]
    UnboundedBody { direction: Vec<f64> },

    #[error("covering impossible: {0}")]
    CoveringImpossible(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("check registered without an anchor: {0}")]
    MissingAnchor(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
