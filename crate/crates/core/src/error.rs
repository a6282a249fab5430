use serde::Serialize;
use thiserror::Error;

/// Failure modes shared by all solvers.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type used for the computation.
#[derive(Debug, Clone, Error, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum QacError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrand not finite at node {index} (z = {node})")]
    NonFiniteIntegrand { index: usize, node: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("fixed point not converged after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("iteration diverged at step {iteration}")]
    Divergence { iteration: usize, last: Vec<f64> },

    #[error("tracked minimum vanished near Gamma = {last_gamma}")]
    Spinodal { last_gamma: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("replica-symmetric solution breaks down (C = {c} >= 1)")]
    ReplicaBreakdown { c: f64 },

    #[error("gap {gap:e} at N = {n} is below the precision floor {floor:e}")]
    Precision { n: usize, gap: f64, floor: f64 },
}

pub type Result<T> = std::result::Result<T, QacError>;

impl QacError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QacError::InvalidInput(msg.into())
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            QacError::InvalidInput(_) => "invalid_input",
            QacError::NonFiniteIntegrand { .. } => "non_finite_integrand",
            QacError::NoBracket { .. } => "no_bracket",
            QacError::NonConvergence { .. } => "non_convergence",
            QacError::Divergence { .. } => "divergence",
            QacError::Spinodal { .. } => "spinodal",
            QacError::NotFound(_) => "not_found",
            QacError::ReplicaBreakdown { .. } => "replica_breakdown",
            QacError::Precision { .. } => "precision",
        }
    }
}
