use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps `Inconsistent` to exit code 1 and `InvalidInput` / `Schema`
/// to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("precision exhausted: needed {needed} p-adic digits, only {achieved} available")]
    Precision { needed: u32, achieved: u32 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
