use thiserror::Error;

/// Errors raised by the model, its solvers and the estimators built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("solver did not converge after {iterations} iterations (best residual norm {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("period {period}: solver failed (residual norm {residual:.3e})")]
    PeriodSolver { period: usize, residual: f64 },

    #[error("money FOC cannot hold with chi = {given}: steady state requires chi = {required}")]
    ChiInfeasible { given: f64, required: f64 },

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("singularity: {0}")]
    Singular(String),

    #[error("rank-deficient regressor matrix; collinear columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },

    #[error("matrix is not positive semi-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("insufficient sample: need more than {needed} observations, have {have}")]
    InsufficientSample { needed: usize, have: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("target unattainable: {0}")]
    Unattainable(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
