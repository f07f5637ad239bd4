use thiserror::Error;

/// Errors raised by the numerical kernels and the protocol evaluator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well formed but too large for the chosen evaluation mode.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A protocol description is inconsistent (bad alphabet, acausal input, ...).
    #[error("invalid protocol: {0}")]
    Validation(String),
    /// A protocol text file could not be parsed.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
