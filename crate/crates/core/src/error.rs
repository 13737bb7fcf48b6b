use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("input error: {0}")]
    Input(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A witness exists but cannot be written down over the rationals.
    #[error("inexact: {0}")]
    Inexact(String),
    /// Something the construction guarantees was violated; always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}
