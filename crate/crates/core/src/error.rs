use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument falls outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coupling constant does not keep the mixed functional positive.
    #[error("inadmissible coupling: kappa = {kappa} <= threshold {threshold}")]
    Inadmissible { kappa: f64, threshold: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero norm in {0}")]
    ZeroNorm(&'static str),

    #[error("no sign change while bracketing the {0}")]
    NoSignChange(&'static str),

    #[error("descent stalled: {0}")]
    Divergence(String),

    #[error("classification mismatch: {0}")]
    ClassificationMismatch(String),

    #[error("target {target} below infimum {infimum}")]
    BelowInfimum { target: f64, infimum: f64 },

    #[error("inconsistent constants: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
