use thiserror::Error;

/// Failure modes shared across the crate. `Domain` covers precondition
/// violations on values, `Numerical` covers runtime numeric breakdown
/// (rank deficiency, non-convergence), and the rest are I/O and surface
/// concerns of the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),
    #[error("instance too large: {0}")]
    SizeGuard(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
