use thiserror::Error;

/// Errors surfaced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not positive definite (min eigenvalue sum {min_sum:e})")]
    NotPositiveDefinite { min_sum: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("eigendecomposition did not converge (off-diagonal mass {off:e})")]
    EigenNonConvergence { off: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense oracle limit exceeded: p = {p} > {limit}")]
    OracleLimit { p: usize, limit: usize },

    #[error("line search failed to produce an acceptable step after {halvings} halvings (iteration {iteration}, step {step:e}, objective {objective:e})")]
    LineSearchFailed {
        halvings: usize,
        iteration: usize,
        step: f64,
        objective: f64,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
