use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("root not bracketed on [{lo:e}, {hi:e}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("dynamics failure: {0}")]
    Dynamics(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("compatibility conditions violated: residuals {residuals:?} exceed {tol:e} rad")]
    Compatibility { residuals: [f64; 3], tol: f64 },

    #[error("synthesis failure: {0}")]
    Synthesis(String),

    #[error("design infeasible: {0}")]
    Design(String),

    #[error("logical subspace leakage: {0}")]
    Encoding(String),

    #[error("sample {index}: {source}")]
    Sample { index: u64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}
