use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact search ran out of its node budget. Carries the best lower
    /// bound established before the budget was exhausted.
    #[error("node budget exhausted; best lower bound found: {lower}")]
    Inexact { lower: usize },

    /// Rejection sampling gave up. Signals parameters for which the
    /// acceptance probability is far too small, not bad luck.
    #[error("subsampling rejected {attempts} consecutive attempts")]
    AttemptsExhausted { attempts: usize },

    /// A checkable certificate (counting bound, accuracy bound) failed to
    /// re-verify. For heuristic decompositions this means the search missed
    /// a sparse subcode; rerun in exact mode.
    #[error("certificate violation: {0}")]
    CertificateViolation(String),

    /// The dimension-free loop made no progress while the instance still
    /// demanded shrinking. The constants are too large for the instance.
    #[error("stagnation: {0}")]
    Stagnation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for input errors, 3 for
    /// budget/attempt exhaustion, 1 for failed certificates.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Inexact { .. } | Error::AttemptsExhausted { .. } | Error::Stagnation(_) => 3,
            Error::CertificateViolation(_) => 1,
        }
    }
}
