use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the set where the function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result cannot be represented as a finite `f64`.
    #[error("range error: {0}")]
    Range(String),

    /// Adaptive integration stopped before reaching the requested tolerance.
    #[error(
        "integration did not converge after {subdivisions} panels \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    Convergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
