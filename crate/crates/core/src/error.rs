use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("probabilities sum to {sum}, expected 1 within {tol}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("negative probability {value} on line {line}")]
    NegativeProbability { line: usize, value: f64 },

    #[error("empty variable selector")]
    EmptySelector,

    #[error("variable index {index} out of range for arity {arity}")]
    SelectorOutOfRange { index: usize, arity: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("selectors overlap on variable {0}")]
    OverlappingSelectors(usize),

    #[error("derived variables are defined over different distributions")]
    MismatchedBase,

    #[error("label vector has length {got}, support has {expected} outcomes")]
    LabelLength { expected: usize, got: usize },

    #[error("need at least 2 predictors, got {0}")]
    TooFewPredictors(usize),

    #[error("invalid part: {0}")]
    InvalidPart(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("enumeration for n = {n} exceeds the limit of {limit}")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("solver did not converge after {iterations} iterations (best bound {best_bound})")]
    NonConvergence { iterations: usize, best_bound: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("ordering violated: {0}")]
    OrderingViolation(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
