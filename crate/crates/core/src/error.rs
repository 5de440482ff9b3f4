use thiserror::Error;

/// Errors raised by model construction, fitting and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid correlation specification: {0}")]
    InvalidSpec(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The smallest eigenvalue is numerically zero or negative.
    #[error("correlation matrix is numerically singular (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    Singular { lambda_min: f64, lambda_max: f64 },

    /// Cholesky factorization of the regularized matrix failed.
    #[error("correlation matrix is not positive definite after regularization")]
    IllConditioned,

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    /// Constant response: the profiled deviance is unbounded below.
    #[error("degenerate response: all outputs are equal")]
    Degenerate,

    /// Every optimizer start returned a non-finite deviance.
    #[error("no finite deviance was found by any start")]
    Unfittable,

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
