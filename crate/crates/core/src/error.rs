use thiserror::Error;

/// Errors raised across the crate.
///
/// The CLI maps [`Error::Regime`] to exit code 2 and [`Error::Malformed`] to
/// exit code 3; everything else is a usage or internal failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero in the field")]
    DivisionByZero,

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parameter regime violation: {0}")]
    Regime(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("degree {degree} exceeds the supported bound {bound}")]
    DegreeTooLarge { degree: usize, bound: usize },

    #[error("the zero polynomial has no Q-multiplicity")]
    ZeroPolynomial,

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
