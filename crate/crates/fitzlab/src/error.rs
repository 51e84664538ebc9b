use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative infinity is not a valid extended-real value")]
    NegativeInfinity,

    #[error("NaN is not a valid extended-real value")]
    NotANumber,

    #[error("improper function: no finite value in the table")]
    ImproperFunction,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point is not on the grid: {0}")]
    OffGrid(String),

    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),

    #[error("operator graph is empty")]
    EmptyGraph,

    #[error("operator graph contains a duplicate pair")]
    DuplicatePair,

    #[error("graph is not monotone (pairs {a:?}, {b:?}: product {product})")]
    NotMonotone {
        a: Vec<f64>,
        b: Vec<f64>,
        product: f64,
    },

    #[error("precondition failed: representative gap {gap} is not below epsilon {eps}")]
    PreconditionGap { gap: f64, eps: f64 },

    #[error("resolution exhausted: no equality-set node inside the search box at the current grid resolution")]
    ResolutionExhausted,

    #[error("family membership precondition failed: {0}")]
    MembershipFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown check name '{0}'")]
    UnknownCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
