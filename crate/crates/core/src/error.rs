use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants split into two families: input validation (bad shapes, roles,
/// parameters, malformed documents) and numeric-domain failures (divergent
/// integrals, moment sequences that are not positive, exhausted exactness).
/// [`Error::is_numeric_domain`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),

    #[error("embedding direction violated: need p' > p, got p = {p}, p' = {p_prime}")]
    EmbeddingDirection { p: f64, p_prime: f64 },

    #[error(
        "gaussian integral diverges: 2*alpha*lambda^(-2p) = {factor} >= 1 at coordinate {index}"
    )]
    GaussianDivergence { index: usize, factor: f64 },

    #[error("role mismatch: expected a {expected} element, found {found}")]
    RoleMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("moment of order {requested} needs kernels beyond truncation degree {available}; pass an explicit truncation acknowledgement")]
    Truncation { requested: usize, available: usize },

    #[error("polarization order {0} exceeds the limit of 12")]
    PolarizationOrder(usize),

    #[error("insufficient moments: {0}")]
    InsufficientMoments(String),

    #[error("moment sequence not strictly positive at order {order} (min eigenvalue {min_eigenvalue:e})")]
    NotStrictlyPositive { order: usize, min_eigenvalue: f64 },

    #[error("too many multi-indices: {count} > {limit}")]
    TooManyMultiIndices { count: usize, limit: usize },

    #[error("quadrature exactness exceeded: degree {degree} > 2m-1 = {limit}")]
    ExactnessExceeded { degree: usize, limit: usize },

    #[error("combinatorial guard exceeded: {0}; use a smaller dimension or n_max")]
    Guard(String),

    #[error("measure rejected: exponential moment with epsilon = {epsilon} diverges")]
    MeasureRejected { epsilon: f64 },

    #[error("numeric domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("document error: {0}")]
    Document(String),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the mathematics (divergence, non-positivity,
    /// exactness limits) rather than of the input's shape.
    pub fn is_numeric_domain(&self) -> bool {
        matches!(
            self,
            Error::GaussianDivergence { .. }
                | Error::Truncation { .. }
                | Error::InsufficientMoments(_)
                | Error::NotStrictlyPositive { .. }
                | Error::ExactnessExceeded { .. }
                | Error::MeasureRejected { .. }
                | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
