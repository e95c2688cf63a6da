use thiserror::Error;

use crate::markov::Distribution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("out of supported range: {0}")]
    Range(String),

    /// Power iteration did not settle; carries the last iterate.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        iterations: usize,
        residual: f64,
        last: Box<Distribution>,
    },

    /// Two evaluation routes that must agree did not. Always a bug.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("undefined test: {0}")]
    UndefinedTest(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}
