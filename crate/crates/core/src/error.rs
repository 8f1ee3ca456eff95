use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid coverage violated: {0}")]
    GridCoverage(String),

    #[error("path sum with {steps} steps exceeds the cap of {cap} steps")]
    PathSumTooLarge { steps: usize, cap: usize },

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("too few extrema to extract an envelope: found {found}, need {needed}")]
    TooFewExtrema { found: usize, needed: usize },

    #[error("outside the validity domain: {0}")]
    OutOfDomain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
