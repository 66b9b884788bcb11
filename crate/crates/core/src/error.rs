use thiserror::Error;

use crate::word::Word;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this kind of input.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An enumeration or materialization would exceed the given budget.
    #[error("budget `{budget}` exhausted (limit {limit})")]
    Resource { budget: &'static str, limit: usize },

    /// A documented precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A word set is not prefix-free.
    #[error("dictionary is not proper: `{prefix}` is a prefix of `{word}`")]
    NotProper { prefix: Word, word: Word },

    /// A bitstream could not be decoded.
    #[error("corrupt input at bit {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },

    /// Phrase sampling could not complete a phrase.
    #[error("simulation aborted after {steps} symbols (partial phrase `{prefix}`): {reason}")]
    Simulation {
        prefix: String,
        steps: usize,
        reason: String,
    },

    /// Malformed file or text input.
    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
