use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The adaptive spectral sum could not meet its tolerance before the level cap.
    #[error(
        "truncation failure: tail bound {achieved_bound:e} exceeds tolerance {rel_tol:e} at {levels} levels"
    )]
    TruncationFailure {
        achieved_bound: f64,
        rel_tol: f64,
        levels: usize,
    },

    #[error("singular fit: column {column} is linearly dependent on the preceding columns")]
    SingularFit { column: usize },

    #[error("insufficient data: {observations} observations for {parameters} parameters")]
    InsufficientData {
        observations: usize,
        parameters: usize,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
