use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hermite degree {degree} exceeds the supported maximum of {max}")]
    DegreeAboveCap { degree: usize, max: usize },

    #[error("invalid interval: lower limit {a} exceeds upper limit {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("quadrature did not converge: error estimate {error_estimate:e} after {intervals} subintervals")]
    QuadratureNonConvergence {
        value: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations")]
    RootNonConvergence { iterations: usize },

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid piecewise-constant function: {0}")]
    InvalidFunction(String),

    #[error("step function is not supported on the strip: {0}")]
    SupportViolation(String),

    #[error("no balancing root for the free breakpoint in [{lo}, {hi}]")]
    NoRootInCell { lo: f64, hi: f64 },

    #[error("first moment is not monotone in the free breakpoint on [{lo}, {hi}]")]
    NotMonotone { lo: f64, hi: f64 },

    #[error("not a strip pair: L2 defect {defect:e} exceeds tolerance {tol:e}")]
    NotAStripPair { defect: f64, tol: f64 },

    #[error("gap term {gap} is not positive; the bound chain does not apply")]
    NonPositiveGap { gap: f64 },

    #[error("value deficit {deficit:e} exceeds the claimed eta {eta:e}")]
    DeficitExceedsEta { deficit: f64, eta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
