use thiserror::Error;

/// Errors raised by the EL solver, model evaluation and the samplers.
///
/// Infeasibility of an empirical-likelihood problem is *not* an error; it is
/// reported through [`crate::elcore::ElSolution::feasible`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("root of the conditional estimating equation not found after {iterations} iterations (residual {residual:e})")]
    RootNotFound { iterations: usize, residual: f64 },

    #[error("initial state has zero posterior density")]
    InitInfeasible,

    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("empty trace after burn-in (length {length}, burn-in {burn_in})")]
    EmptyTrace { length: usize, burn_in: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
