use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// Infeasible and unbounded linear programs are *not* errors; they are
/// reported through [`crate::matrix_game::LpOutcome`]. `Error` covers
/// malformed inputs, configured resource caps, and numerical breakdowns
/// that indicate a bug rather than a property of the input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn limit(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
