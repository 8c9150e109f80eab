use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has {got} entries, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("negative value in {0}")]
    NegativeValue(String),
    #[error("incomplete bandwidth table: missing entry for failed node {failed} with helpers {helpers:?}")]
    IncompleteTable { failed: usize, helpers: Vec<usize> },
    #[error("malformed bandwidth table: {0}")]
    MalformedTable(String),
    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("scalar must be positive, got {0}")]
    NonPositiveScalar(String),
    #[error("operation `{op}` does not support the {model} bandwidth model")]
    ModelUnsupported {
        op: &'static str,
        model: &'static str,
    },
    #[error("search too large: {0}")]
    SearchTooLarge(String),
    #[error("bound sandwich violated: {0}")]
    SandwichViolation(String),
    #[error("not a permutation of 0..{n}: {sigma:?}")]
    NotAPermutation { sigma: Vec<usize>, n: usize },
    #[error("cannot combine systems with different parameters: {0}")]
    ParamMismatch(String),
    #[error("explicit lift needs n! copies; n = {n} exceeds the limit {limit}")]
    TooManyPermutations { n: usize, limit: usize },
    #[error("explicit lift is not homogeneous: {0}")]
    LiftNotHomogeneous(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("duplicate node indices in {0:?}")]
    DuplicateIndices(Vec<usize>),
    #[error("causality violation: {0}")]
    CausalityViolation(String),
    #[error("scaled capacity does not fit in 128 bits: {0}")]
    CapacityOverflow(String),
    #[error("value {0} is not an integer number of units")]
    NonIntegerUnits(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("bad helper set: {0}")]
    BadHelpers(String),
    #[error("bad user set: {0}")]
    BadUserSet(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that can only come from a bug in this crate, never from input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::SandwichViolation(_) | Error::LiftNotHomogeneous(_) | Error::OracleMismatch(_)
        )
    }
}
