use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported kernel variant: {0}")]
    UnsupportedVariant(String),

    /// A documented precondition of a solver or strategy does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solution diverged at node {node} (t = {time}): |value| = {value:e} exceeds {threshold:e}")]
    Divergence {
        node: usize,
        time: f64,
        value: f64,
        threshold: f64,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidArgument(_)
                | Error::UnsupportedVariant(_)
                | Error::Precondition(_)
                | Error::Validation(_)
        )
    }
}
