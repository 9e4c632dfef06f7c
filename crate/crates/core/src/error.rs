use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation exists but not for this configuration.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Adaptive quadrature or a series did not reach its tolerance.
    #[error("numerical failure in {context}: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Numerical {
        context: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// One or more parameter fields are invalid; every violation is listed.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
}
