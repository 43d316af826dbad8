use thiserror::Error;

/// Failures surfaced by the numerical routines and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular or too ill-conditioned (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("bit sequence has odd length {0}")]
    OddLength(usize),
    #[error("curve never crosses target {target:.3e}")]
    TargetNotBracketed { target: f64 },
    #[error("user group is empty")]
    EmptyGroup,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
