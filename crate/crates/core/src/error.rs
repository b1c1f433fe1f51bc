use thiserror::Error;

/// Errors raised by channel construction, the allocators and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("channel set is empty")]
    EmptyChannel,

    #[error("noise variance at subchannel {index} must be positive, got {value}")]
    NonPositiveNoise { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every subchannel has zero SNR")]
    AllZeroProfile,

    #[error("bit count must be positive for this expression")]
    ZeroBits,

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("allocation carries no bits")]
    EmptyAllocation,

    #[error("dissimilarity is undefined for two empty allocations")]
    UndefinedDissimilarity,

    #[error("root is not bracketed: f({x1}) = {f1}, f({x2}) = {f2}")]
    BracketViolation { x1: f64, x2: f64, f1: f64, f2: f64 },

    #[error("root finder did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("enumeration budget exceeded: {states} states > {budget}")]
    BudgetExceeded { states: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
