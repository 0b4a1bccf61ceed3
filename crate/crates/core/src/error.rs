use thiserror::Error;

/// Errors raised by the library.
///
/// Verdict statuses are never errors; these cover bad inputs and exceeded caps.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("certificate rejected: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Resource(msg.into()))
}
