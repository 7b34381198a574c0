use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension cap exceeded: total dimension {dim} > cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("serialization: {0}")]
    Serde(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
