use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration did not converge after {panels} panels (partial value {partial:e}, error estimate {error:e})")]
    Integration {
        partial: f64,
        error: f64,
        panels: usize,
    },

    #[error("trajectory integration failed: {0}")]
    Trajectory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
