use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The steady state is not unique to numerical precision.
    #[error("ambiguous steady state: relative spectral gap {gap:.3e} below tolerance")]
    AmbiguousSteadyState { gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("missing multi-photon peak for order {missing}; detected orders {found:?}")]
    MissingPeak { missing: usize, found: Vec<usize> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Returns a domain error unless every value is finite and strictly positive.
pub(crate) fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, value) in pairs {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::domain(format!("{name} must be > 0, got {value}")));
        }
    }
    Ok(())
}

pub(crate) fn require_non_negative(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, value) in pairs {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::domain(format!("{name} must be >= 0, got {value}")));
        }
    }
    Ok(())
}
