use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate stencil: spacing {h} exceeds kernel support radius {radius}")]
    DegenerateStencil { h: f64, radius: f64 },

    #[error("kernel lower bound on the domain is not positive (kappa = {kappa})")]
    ConditionViolated { kappa: f64 },

    #[error("M_p(0) is singular for p = {p} < 2")]
    Singularity { p: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value produced in {context}")]
    NonFinite { context: String },

    #[error("proximal step did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    StepFailure { iterations: usize, grad_norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("check not applicable: {0}")]
    Inapplicable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
