use num_complex::Complex64;
use thiserror::Error;

use crate::coeffexpr::{EvalError, ParseError};
use crate::ode::OdeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("p not positive: p({x}) = {value}")]
    NonPositiveP { x: f64, value: f64 },
    #[error("grid would exceed {cap} nodes while covering [{x_from}, {x_to}]")]
    GridTooLarge { cap: usize, x_from: f64, x_to: f64 },
    #[error(
        "oscillation budget exceeded: total phase {phase:.3e} rad > {budget:.3e}; reduce x_max or the accuracy target"
    )]
    PhaseBudget { phase: f64, budget: f64 },
    #[error("x_max is 'auto' and has not been resolved; classify the endpoint and truncate first")]
    XMaxUnresolved,
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("precondition: LC required")]
    LcRequired,
    #[error("precondition: LP required")]
    LpRequired,
    #[error("truncation cap exceeded at x = {x:.3e}; achievable tail is {achievable_tail:.3e}")]
    TruncationCap { x: f64, achievable_tail: f64 },
    #[error("z = {z} is (numerically) an eigenvalue: denominator {denominator:.3e}")]
    NearEigenvalue { z: Complex64, denominator: f64 },
    #[error("invalid cutoff interval [{a}, {b}] (need 0 < a < b <= {limit})")]
    InvalidCutoff { a: f64, b: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
