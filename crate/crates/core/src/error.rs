use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("admissibility error: {0}")]
    Admissibility(String),
    #[error("tolerance not met: estimated error {est:.3e} exceeds target {target:.3e}")]
    Tolerance { est: f64, target: f64 },
    #[error("resolution limit: {0}")]
    Resolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("overlapping supports: {0}")]
    Overlap(String),
    #[error("antisymmetry violated: |w(x) + w(x^λ)| = {0:.3e}")]
    Antisymmetry(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
