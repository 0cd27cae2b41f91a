use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation hit a genuine singularity (a pole or the tip of the wedge).
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("solver did not converge after {iterations} iterations (max-norm residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A random walk used up its step budget without leaving the domain.
    #[error("walk exceeded its step budget of {budget} steps")]
    StepBudget { budget: u64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("plot error: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singularity(msg.into())
    }
}
