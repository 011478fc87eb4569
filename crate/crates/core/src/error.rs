use thiserror::Error;

/// Errors raised by estimation, simulation and configuration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {got}")]
    InvalidLength { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular design: {0}")]
    Singular(String),

    /// Zero residual variance or otherwise degenerate data; test statistics
    /// would be infinite or undefined.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Malformed experiment configuration; the message starts with the key path.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
