use thiserror::Error;

use crate::seq::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("assumption check failed:\n{0}")]
    AssumptionsFailed(ValidationReport),

    #[error("update leaves the contraction regime at n={n}, x={x}: gamma_n*Z_n = {factor}")]
    ContractionViolation { n: u64, x: f64, factor: f64 },

    #[error("density stepsize beta_{n} = {value} exceeds 1")]
    InvalidStepsize { n: u64, value: f64 },

    #[error("degenerate denominator at x={x}")]
    DegenerateDenominator { x: f64 },

    #[error("non-finite sample ({x}, {y})")]
    NonFiniteSample { x: f64, y: f64 },

    #[error("xi diverges: stepsize power {power} > 1")]
    DivergentXi { power: f64 },

    #[error("design density vanishes at x={x} (f(x) = {value})")]
    ZeroDensity { x: f64, value: f64 },

    #[error("theorem condition violated: {0}")]
    ConditionViolated(String),

    #[error("variance factor has a pole: 1 + a - 2q = {0} <= 0")]
    PoleAtDenominator(f64),

    #[error("evaluation point {0} is not tracked by the estimator state")]
    UnknownPoint(f64),

    #[error("history length {history} does not match estimator sample count {state}")]
    HistoryMismatch { history: usize, state: u64 },
}
