use thiserror::Error;

use crate::params::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring size mismatch: {left} vs {right}")]
    RingMismatch { left: usize, right: usize },

    #[error("element is a zero divisor and has no inverse")]
    NotInvertible,

    #[error("invalid sparse element: {0}")]
    InvalidSparse(&'static str),

    #[error("invalid parameter set: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))]
    InvalidParams(Vec<Violation>),

    #[error("unknown parameter set `{0}`")]
    UnknownParams(String),

    #[error("seed must be {expected} bytes, got {actual}")]
    SeedLength { expected: usize, actual: usize },

    #[error("key generation failed after {attempts} attempts: L block kept turning out singular")]
    KeyGeneration { attempts: usize },

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
