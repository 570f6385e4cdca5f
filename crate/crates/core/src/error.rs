use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("discretization error: {0}")]
    Discretization(String),
    #[error("power iteration did not converge after {iterations} steps (residual {residual:e})")]
    Iteration { iterations: usize, residual: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
