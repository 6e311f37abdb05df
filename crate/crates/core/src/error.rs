use thiserror::Error;

use crate::scenario::ConfigError;

/// Errors raised by the solver and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent {0}: power-law coefficients need alpha > 0")]
    InvalidExponent(f64),
    #[error("invalid point {0}: positions must lie in [0, 1]")]
    InvalidPoint(f64),
    #[error("coefficient is not degenerate: min over the probe grid is {0} > 0")]
    NotDegenerate(f64),
    #[error("invalid K = {0}: the hypothesis requires K in [1, 2)")]
    InvalidK(f64),
    #[error("hypothesis not applicable: {0}")]
    HypothesisNotApplicable(&'static str),
    #[error("grid too coarse: {0} elements, need at least 2")]
    TooCoarse(usize),
    #[error("invalid grading: {0}")]
    InvalidGrading(&'static str),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid quadrature order {0}")]
    InvalidOrder(usize),
    #[error("1/a-weighted integral diverges near x0 (no convergence after depth {depth})")]
    DivergentIntegral { depth: usize },
    #[error("weighted mass entry ({row}, {col}) diverges: missing essential constraint at x0")]
    AssemblyDivergence { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system matrix is singular (pivot {0})")]
    SystemSingular(usize),
    #[error("invalid scheme parameter theta = {0}")]
    InvalidScheme(f64),
    #[error("invalid time step dt = {0}")]
    InvalidStep(f64),
    #[error("mass matrix not positive definite (pivot {0})")]
    PivotFailure(usize),
    #[error("weighted norm is infinite")]
    NormInfinite,
    #[error("function is not in W: {0}")]
    NotInW(&'static str),
    #[error("manufactured solution violates {condition}: residual {residual:e}")]
    InvalidManufacturedSolution { condition: String, residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
