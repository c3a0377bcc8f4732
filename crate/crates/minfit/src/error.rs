use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fitness must be positive, finite, and within [1e-300, 1e300], got {value}")]
    InvalidFitness { value: f64 },
    #[error("log-normal scale parameter must be finite, got {mu}")]
    InvalidMu { mu: f64 },
    #[error("log-normal shape parameter must be finite and non-negative, got {sigma}")]
    InvalidSigma { sigma: f64 },
    #[error("attribute vector must be non-empty")]
    EmptyAttributes,
    #[error("attributes must be positive and finite, got {value}")]
    InvalidAttribute { value: f64 },
    #[error("population must contain at least one node")]
    EmptyPopulation,
    #[error("tier {tier} is empty")]
    EmptyTier { tier: usize },
    #[error("duplicate node id {id}")]
    DuplicateNodeId { id: u64 },
    #[error("probability distribution invalid: {reason}")]
    InvalidDistribution { reason: String },
    #[error("attachment weights sum to zero under the selected rule")]
    DegenerateWeights,
    #[error("path enumeration limit exceeded: {paths} feasible paths, limit {limit}")]
    PathEnumerationLimit { paths: u128, limit: u128 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Attach a source line number, turning any error into a parse error.
    pub(crate) fn at_line(self, line: usize) -> Error {
        match self {
            Error::Parse { .. } => self,
            other => Error::Parse {
                line,
                message: other.to_string(),
            },
        }
    }
}
