use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CmcError {
    #[error("time coordinate {x0} outside the open interval ({lo}, {hi})")]
    Domain { x0: f64, lo: f64, hi: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("graph is not spacelike at grid point {index}: |Du|^2 = {du2}")]
    SpacelikeViolation { index: usize, du2: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate slice at tau = {tau}: lambda_min = {lambda_min:e}")]
    DegenerateSlice { tau: f64, lambda_min: f64, u: Vec<f64> },

    #[error("newton failed at tau = {tau} after {iterations} iterations: {reason} (residual {residual:e})")]
    NonConvergence { tau: f64, iterations: usize, residual: f64, reason: String },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenSolve { iterations: usize },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{} spacetime grid points are not covered by the foliation", .points.len())]
    Coverage { points: Vec<(f64, f64)> },

    #[error("Harnack bound violated: tau differs by {dtau} while inf|u - u'| = 0")]
    HarnackViolation { dtau: f64 },
}

pub type Result<T> = std::result::Result<T, CmcError>;
