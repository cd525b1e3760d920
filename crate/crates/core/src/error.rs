//! Error types shared across the toolkit.
//!
//! The four variants map onto the CLI exit codes: structural and domain
//! errors are validation failures (exit 1), convergence failures exit 2,
//! precision dead-zones exit 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SfError {
    /// Malformed data: block shape mismatches, bad algebra parameters,
    /// unparseable scenarios.
    #[error("structural error: {0}")]
    Structural(String),

    /// Input violates a mathematical precondition (non-Hermitian operator,
    /// non-unitary symbol, vanishing symbol, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive procedure failed to reach its tolerance.
    #[error("convergence error: {message} (achieved {achieved:.3e}, requested {requested:.3e})")]
    Convergence {
        message: String,
        achieved: f64,
        requested: f64,
    },

    /// A rank or dimension decision fell into the dead zone between the
    /// noise floor and the acceptance threshold.
    #[error("precision error: {0}")]
    Precision(String),
}

impl SfError {
    pub fn structural(msg: impl Into<String>) -> Self {
        SfError::Structural(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        SfError::Domain(msg.into())
    }

    pub fn precision(msg: impl Into<String>) -> Self {
        SfError::Precision(msg.into())
    }

    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SfError::Structural(_) | SfError::Domain(_) => 1,
            SfError::Convergence { .. } => 2,
            SfError::Precision(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SfError::Structural(_) => "validation",
            SfError::Domain(_) => "validation",
            SfError::Convergence { .. } => "convergence",
            SfError::Precision(_) => "precision",
        }
    }
}

pub type Result<T> = std::result::Result<T, SfError>;
