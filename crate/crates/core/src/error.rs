use thiserror::Error;

/// Errors raised by fitting, effect computation and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("objective or gradient is not finite{}", context_suffix(.0))]
    NonFinite(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("outcome is degenerate: {0}")]
    DegenerateOutcome(String),
    #[error("hessian is singular")]
    SingularHessian,
    #[error("covariance matrix is singular or not positive semi-definite")]
    SingularCovariance,
    #[error("specification does not match the fitted models: {0}")]
    SpecMismatch(String),
    #[error("model did not converge; effects are not available")]
    NotConverged,
    #[error("ratio-scale estimate must be positive, got {0}")]
    NonPositiveEstimate(f64),
    #[error("total effect is null; proportion mediated is undefined")]
    NullTotalEffect,
    #[error("too many failed replicates: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn context_suffix(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" ({s})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
