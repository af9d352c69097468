use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("root finder did not converge after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },

    #[error("quadrature tolerance not met: estimate {estimate} with error bound {error:e}")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("distribution has no rational transform: {0}")]
    NotRational(String),

    #[error("distribution cannot be sampled: {0}")]
    NotSimulable(String),

    #[error("evaluation point {point} hits a pole of the transform")]
    PoleHit { point: Complex64 },

    #[error("integration path collides with a pole: {0}")]
    PoleCollision(String),

    #[error("inconclusive stability check: {0}")]
    Inconclusive(String),

    #[error("stability precondition fails: {0}")]
    Stability(String),

    #[error("expected {expected} roots in the right half-plane, found {found}")]
    RootCountMismatch { expected: usize, found: usize },

    #[error("series did not reach tail bound {tail_tol:e} within {max_terms} terms (bound {tail_bound:e})")]
    SeriesBudgetExceeded { max_terms: usize, tail_tol: f64, tail_bound: f64 },

    #[error("stationary routes disagree: {0}")]
    ExtrapolationMismatch(String),

    #[error("evaluation at s = lambda is not defined for this formula")]
    SEvalAtLambda,

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("grid too coarse: interpolation orders differ by {discrepancy:e}")]
    GridTooCoarse { discrepancy: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),
}
