use thiserror::Error;

use crate::elem::ElementCode;

/// Errors raised by group arithmetic, builders, morphisms and the entropy engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot decode element code {code}: {reason}")]
    Decode { code: ElementCode, reason: String },

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("resource budget exceeded: {what} (limit {limit})")]
    Budget { what: &'static str, limit: usize },

    #[error("ambient group mismatch: {left} vs {right}")]
    AmbientMismatch { left: String, right: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
