use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("linear solve failed in {context}: condition number {cond:.3e} exceeds 1e12")]
    IllConditioned { context: &'static str, cond: f64 },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("simulation diverged at step {step} (t = {t:.6}): {what}")]
    Divergence { step: usize, t: f64, what: String },

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
