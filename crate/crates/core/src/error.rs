use thiserror::Error;

/// Errors shared by the mixing operators and the sharded runtime.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not line up; the message names both shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A parameter set is inconsistent with the sequence it is applied to.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A computation produced or detected non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A worker/head layout cannot be constructed.
    #[error("layout error: {0}")]
    Layout(String),
    /// A shuffle violated the exactly-once tiling contract.
    #[error("shuffle protocol violation: {0}")]
    Protocol(String),
    /// A matrix file could not be read, parsed, or written.
    #[error("matrix file error: {0}")]
    File(String),
}

pub type Result<T> = std::result::Result<T, Error>;
