use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace:e}, expected 1")]
    TraceViolation { trace: f64 },

    #[error("negative eigenvalue {min_eigenvalue:e} at t = {t}")]
    PositivityViolation { min_eigenvalue: f64, t: f64 },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("maximum number of steps exceeded at t = {t}")]
    MaxStepsExceeded { t: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("generator is time dependent; a static generator is required")]
    TimeDependentGenerator,

    #[error("steady state is not unique (smallest singular value {sigma:e})")]
    DegenerateSteadyState { sigma: f64 },

    #[error("steady-state iteration did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("level shifts are not balanced: alpha = {alpha:e}, tolerance {tolerance:e}")]
    AlphaNotBalanced { alpha: f64, tolerance: f64 },

    #[error("aux-drive radicand is negative ({radicand:e}); flip the sign of the detuning")]
    NegativeRadicand { radicand: f64 },

    #[error("simplified reduced master equation undefined: {0}")]
    SimplifiedRouteUndefined(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("tail fit residual {residual:e} exceeds {limit:e}; increase tau_max")]
    TailFit { residual: f64, limit: f64 },
}
