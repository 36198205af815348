use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("insufficient window: {0}")]
    InsufficientWindow(String),
    #[error("empty result window")]
    EmptyWindow,
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("module is not etale: {0}")]
    NotEtale(String),
    #[error("commutation failure for {relation}: witness monomial {witness}")]
    CommutationFailure { relation: String, witness: String },
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("profile did not stabilize under window doubling: {0}")]
    NotStabilized(String),
    #[error("no isomorphism found: {0}")]
    IsomorphismNotFound(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
