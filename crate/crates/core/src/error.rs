use thiserror::Error;

/// Errors raised by the exact geometry and invariant computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input data violates a structural invariant (bad polytope, bad function, bad parameters).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("weight spectrum requires a denominator-cleared configuration")]
    UnscaledConfig,

    /// Held-out validation of the Ehrhart fit failed; usually the period is wrong.
    #[error("ehrhart fit mismatch at k = {k}: {detail}")]
    FitMismatch { k: u64, detail: String },

    #[error("degenerate Gram matrix in {context}")]
    DegenerateGram { context: String },

    #[error("{context} did not converge after {iterations} iterations")]
    NonConvergence { context: String, iterations: usize },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Whether the error comes from a computation rather than from validating input.
    pub fn is_computational(&self) -> bool {
        !matches!(self, Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
