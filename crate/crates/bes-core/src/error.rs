use alloc::string::String;

use crate::formula::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// An operation would exceed an enumeration or representation bound.
    #[error("{what}: {actual} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, limit: u128, actual: u128 },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no relation satisfying the modal conditions found after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
