//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates a structural contract (wrong scale annotation,
    /// mismatched dimensions, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A dense eigenvalue or singular-value iteration did not converge
    /// within its iteration cap.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// The Stieltjes fixed point did not reach the requested tolerance.
    #[error(
        "fixed point did not converge after {iterations} iterations \
         (residuals {residual_system:.3e}, {residual_branch:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        residual_system: f64,
        residual_branch: f64,
    },

    /// No quadratic root with the required sign of Im(w - alpha).
    #[error("branch violation: {0}")]
    Branch(String),

    /// A spectral validation cross-check failed (trace/determinant identity,
    /// pairing symmetry).
    #[error("spectral validation failed: {0}")]
    Validation(String),

    /// Configuration rejected before any computation ran.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
