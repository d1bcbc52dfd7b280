use thiserror::Error;

/// Errors raised by the numerical workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}, history {history:?})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("numerical error: {message} (achieved tolerance {achieved:.3e})")]
    Numerical { message: String, achieved: f64 },

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("estimator error: {0}")]
    Estimator(String),

    #[error("partial data: {failed} of {total} solves failed; first failures {examples:?}")]
    PartialData {
        failed: usize,
        total: usize,
        examples: Vec<(f64, f64)>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
