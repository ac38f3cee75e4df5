use thiserror::Error;

use crate::solver::ResidualReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({domain})")]
    Domain { what: &'static str, value: f64, domain: &'static str },

    #[error("{what} is unbounded at p = {p}")]
    Range { what: &'static str, p: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("utility evaluation overflowed at x = {x}")]
    Overflow { x: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("quantile invariant violated: {0}")]
    InvariantViolation(String),

    #[error("solver did not converge: {report}")]
    NonConvergence { report: Box<ResidualReport> },

    #[error("budget {x} cannot be attained: {reason}")]
    UnattainableBudget { x: f64, reason: String },

    #[error("iteration cap of {iterations} reached without convergence")]
    IterationCap { iterations: usize },

    #[error("coupling enumeration limited to n <= {max}, got n = {n}")]
    Size { n: usize, max: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
