use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative routine stopped before reaching its tolerance.
    #[error("no convergence after {iterations} steps (best estimate {best}, error estimate {error_estimate})")]
    Convergence {
        best: f64,
        error_estimate: f64,
        iterations: usize,
    },
    /// Vector or matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    /// An experiment configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(alloc::format!("{what} must be finite, got {x}")))
    }
}
