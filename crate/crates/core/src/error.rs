use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("missing structure: {0}")]
    MissingStructure(String),

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("modulus {0} is even, so 2 is not invertible")]
    EvenModulus(usize),

    #[error("resource limit exceeded: {what} needs {needed}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("word {0} lies outside the saturated universe")]
    OutOfBound(String),

    #[error("unknown class id {0}")]
    UnknownClass(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("action is not compatible with rule `{rule}`: {counterexample}")]
    Incompatible {
        rule: String,
        counterexample: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
