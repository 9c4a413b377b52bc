use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A value, gradient or objective became NaN or infinite.
    #[error("numeric failure{}: {message}", epoch.map(|e| format!(" at epoch {e}")).unwrap_or_default())]
    Numeric {
        epoch: Option<usize>,
        message: String,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An iterative routine hit its iteration cap before reaching the tolerance.
    #[error("no convergence after {iterations} iterations (gradient mapping norm {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    /// An enumeration oracle was asked to do more work than its fixed budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            epoch: None,
            message: msg.into(),
        }
    }
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::arg(format!(
            "{what}: dimension mismatch (expected {expected}, got {got})"
        )));
    }
    Ok(())
}
