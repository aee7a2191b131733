use thiserror::Error;

/// Errors raised by the simulator and the analytic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("series did not converge after {terms} terms at x = {x}")]
    SeriesNonConvergence { x: f64, terms: usize },

    #[error("series lost precision at x = {x} (largest term {max_term:e}, sum {sum:e})")]
    SeriesPrecisionLoss { x: f64, max_term: f64, sum: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("plan exceeds memory budget: expected {expected:.0} transmitters, budget {budget}")]
    MemoryBudget { expected: f64, budget: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
