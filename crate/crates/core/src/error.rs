use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the sampling library.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size overflow: {requested} exceeds the cap of {cap}")]
    SizeOverflow { requested: u128, cap: u128 },

    #[error("floating-point overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge after {refinements} refinements (last change {last_change:e})")]
    NonConvergence { refinements: usize, last_change: f64 },

    #[error("rejection sampling exhausted after {attempts} draws (best delta {best_delta})")]
    RejectionExhausted { attempts: usize, best_delta: f64 },

    #[error("concentration ratio out of range: delta = {delta}")]
    ConcentrationOutOfRange { delta: f64 },

    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::SizeOverflow { .. } => "size-overflow",
            Error::Overflow(_) => "overflow",
            Error::NonConvergence { .. } => "non-convergence",
            Error::RejectionExhausted { .. } => "rejection-exhausted",
            Error::ConcentrationOutOfRange { .. } => "concentration-out-of-range",
            Error::Trial { source, .. } => source.code(),
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
