use thiserror::Error;

/// Errors raised by the library.
///
/// `TheoremViolation` marks an internal inconsistency: an exact identity that
/// must hold (Laurent property, prefactor cancellation, route agreement) failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported algebra {label}{rank}: {reason}")]
    UnsupportedAlgebra {
        label: String,
        rank: usize,
        reason: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operands belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),

    #[error("negative power of non-monomial image for generator {0}")]
    NonMonomialInverse(String),

    #[error("inexact division: {0}")]
    InexactDivision(String),

    #[error("moment table does not cover {0}")]
    MomentOutOfRange(String),

    #[error("series expansion did not stabilize within depth {0}")]
    NoStabilization(usize),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),
}

impl Error {
    /// True for failures that indicate a broken identity rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::TheoremViolation(_) | Error::InexactDivision(_) | Error::NoStabilization(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
