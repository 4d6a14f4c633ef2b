use thiserror::Error;

/// Errors raised by the arithmetic routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The input is valid but deliberately not handled.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A quantity that must be integral (or otherwise constrained) was not.
    /// This always indicates a bug in an upstream computation.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
