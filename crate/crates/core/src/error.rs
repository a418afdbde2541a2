use thiserror::Error;

/// Errors produced by graph construction, the dynamics and exact analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("size limit exceeded: {what} is {size}, cap is {cap}")]
    SizeLimit { what: String, size: usize, cap: usize },

    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("horizon {horizon} reached with worst-start distance {distance}")]
    Horizon { horizon: usize, distance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual,
        }
    }

    pub(crate) fn size(what: impl Into<String>, size: usize, cap: usize) -> Self {
        Error::SizeLimit {
            what: what.into(),
            size,
            cap,
        }
    }
}
