use thiserror::Error;

/// Errors raised by the numerical kernels and samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("truncated sqrt-gamma mass {mass:e} is below the representable floor")]
    TruncationMassUnderflow { mass: f64 },

    #[error("truncation schedule exhausted after {levels} levels with {pending} component(s) still above the exceedance target")]
    ScheduleExhausted { levels: usize, pending: usize },

    #[error("{0} is singular at this argument")]
    Singular(&'static str),

    #[error("empty sample")]
    EmptySample,

    #[error("iteration did not converge: {0}")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParams(msg.into()))
}
