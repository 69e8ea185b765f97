use thiserror::Error;

/// Every failure the solver stack can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate denominator (p-1)psi^2 + lambda^2 = {0}")]
    DegenerateDenominator(f64),

    #[error("step size underflow at theta = {theta} (h = {step})")]
    StepSizeUnderflow { theta: f64, step: f64 },

    #[error("no bracket found for alpha = {alpha} after {expansions} expansions")]
    BracketNotFound { alpha: f64, expansions: usize },

    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("shooting map is not monotone: {0}")]
    NonMonotone(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("grid too coarse: {interior} interior nodes, need at least {required}")]
    GridTooCoarse { interior: usize, required: usize },

    #[error("angle {theta} is outside the cone of half-aperture {alpha}")]
    OutOfCone { theta: f64, alpha: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("measured quantity is not positive at alpha = {alpha} (value {value})")]
    NonPositiveQuantity { alpha: f64, value: f64 },

    #[error("energy minimization did not converge after {iterations} iterations (gradient ratio {ratio:e})")]
    NonConvergence { iterations: usize, ratio: f64 },
}

impl Error {
    /// Errors caused by invalid input rather than by the numerics.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::OutOfCone { .. } | Error::InsufficientData(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
