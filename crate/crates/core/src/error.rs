use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("horizontal length must be positive, got g = {g}")]
    NonPositiveLength { g: f64 },

    #[error("invalid point state: {0}")]
    InvalidState(String),

    #[error("domain has no interior grid node")]
    EmptyDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("boundary data must be positive, found {value} at boundary node {node}")]
    NonPositiveBoundaryData { node: usize, value: f64 },

    #[error("point lies outside the validity region of the oracle surface")]
    OutsideValidity,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypothesis violated: c2 = {c2} must be below c1 (1 + sqrt(pi/2)) = {limit}")]
    HypothesisViolated { c1: f64, c2: f64, limit: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("line search stalled at step length {step:e} (residual {residual:e})")]
    LineSearchStalled { step: f64, residual: f64 },

    #[error("Jacobian is singular: {0}")]
    SingularJacobian(String),

    #[error("continuation failed at s = {s}, eps = {eps}: {source}")]
    Continuation {
        s: f64,
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
