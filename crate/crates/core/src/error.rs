use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The Cholesky factorization broke down.
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    /// The Cholesky factorization succeeded but the pivot ratio is below the
    /// requested tolerance.
    #[error("matrix is numerically singular (pivot ratio {ratio:e} below {tol:e})")]
    IllConditioned { ratio: f64, tol: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
