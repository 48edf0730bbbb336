use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex level {level} exceeds portrait depth {depth}")]
    DepthExceeded { level: usize, depth: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("permutation does not respect the tree structure: {0}")]
    NotAnAutomorphism(String),

    #[error("enumeration-too-large: {size} elements exceed the cap of {cap}")]
    EnumerationTooLarge { size: String, cap: u64 },

    #[error("state-space-too-large: {states} states exceed the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid defining vector: {0}")]
    InvalidVector(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("measures must be nonnegative and sum to 1 (sum is {0})")]
    MeasuresNotNormalized(String),

    #[error("cannot factor {0} into small primes")]
    Unfactorable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("extension failure: {0}")]
    ExtensionFailure(String),
}

impl Error {
    /// True for errors caused by a resource cap rather than bad input or a
    /// failed mathematical check.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::EnumerationTooLarge { .. } | Error::StateSpaceTooLarge { .. }
        )
    }

    /// True for errors reporting that a mathematical hypothesis or
    /// construction failed on the given input.
    pub fn is_check_failure(&self) -> bool {
        matches!(
            self,
            Error::HypothesisViolation(_) | Error::ExtensionFailure(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
