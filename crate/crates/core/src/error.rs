use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("input must have zero mean (mean {mean:.3e}, norm {norm:.3e})")]
    NonZeroMean { mean: f64, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative density {value:.3e} at grid index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("non-finite value in {field} at t = {time:.6}")]
    NonFinite { field: &'static str, time: f64 },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("infeasible initial data: {0}")]
    InfeasibleInitialData(String),

    #[error("not enough samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample {index} is not positive ({value:.3e}); log-linear fit needs positive values")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("time stamps must be strictly increasing (index {0})")]
    NonMonotoneTime(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
