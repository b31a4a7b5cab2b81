use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("insufficient jet order: {0}")]
    InsufficientOrder(String),

    #[error("point outside chart domain: {0}")]
    Domain(String),

    #[error("metric is not positive definite at the evaluation point")]
    NotPositiveDefinite,

    #[error("tensor is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("unknown soliton `{name}`; valid names: {}", valid.join(", "))]
    UnknownSoliton { name: String, valid: Vec<String> },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("CFL condition violated: dt = {dt:.3e} exceeds limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("positivity lost: {0}")]
    Positivity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
