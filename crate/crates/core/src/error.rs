//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A field parameter was rejected (non-squarefree d, d ∈ {0, 1}, ...).
    #[error("invalid field parameter: {0}")]
    InvalidField(String),

    /// Operands belong to different quadratic fields.
    #[error("mixed-field operands: d = {0} vs d = {1}")]
    MixedFields(i64, i64),

    /// A search exceeded its configured resource bound.
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    /// An argument was outside an operation's supported range.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An ideal or element was not coprime to the relevant modulus.
    #[error("not coprime: {0}")]
    NotCoprime(String),

    /// Character data violated a structural constraint; the message names
    /// the violated condition.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// A discriminant fit (partner field, nebentypus) had no unique answer
    /// within the sampling bound.
    #[error("ambiguous match: {0}")]
    Ambiguous(String),

    /// A search completed with no candidate satisfying the requirements.
    #[error("no match: {0}")]
    NoMatch(String),

    /// Malformed textual input (conductor specs, element strings).
    #[error("parse error: {0}")]
    Parse(String),
}
