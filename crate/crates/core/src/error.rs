use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A deterministic trajectory reached a pole of the Airy quotient.
    #[error("trajectory diverges: {0}")]
    Divergence(String),

    /// An iterative method stopped before meeting its tolerance.
    #[error("{what} did not converge (achieved {achieved:e})")]
    NoConvergence { what: &'static str, achieved: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
