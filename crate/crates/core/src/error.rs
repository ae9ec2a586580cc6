use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the routine is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iteration did not reach its tolerance.
    #[error("no convergence after {iterations} iterations: {detail}")]
    Convergence { iterations: usize, detail: String },

    /// A linear system or gauge transformation is (numerically) singular.
    #[error("singular: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Singular(_))
    }
}
