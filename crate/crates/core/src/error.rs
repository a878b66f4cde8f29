use thiserror::Error;

use crate::peeling::ErasurePattern;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Arithmetic outside the field's domain, e.g. inverting zero.
    #[error("field domain error: {0}")]
    Domain(String),

    /// Invalid parameters or an infeasible request.
    #[error("configuration error: {0}")]
    Config(String),

    /// A randomized construction could not be completed.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Matrices or patterns whose shapes do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Non-binary peeling reached an empty eligible-symbol set.
    #[error("inconsistent messages: eligible set of symbol {symbol} became empty")]
    Inconsistent { symbol: usize },

    /// Stopping-set search ran out of its node budget.
    ///
    /// `partial` holds every stopping set whose smallest index is below
    /// `resume_from`; restarting the search at `resume_from` completes it.
    #[error("search budget of {budget} nodes exhausted; resume from variable {resume_from}")]
    BudgetExceeded {
        budget: u64,
        resume_from: usize,
        partial: Vec<ErasurePattern>,
    },

    /// Codeword enumeration was refused because the code is too large.
    #[error("code has {size_estimate} codewords, above the enumeration budget of {budget}")]
    EnumerationTooLarge { size_estimate: f64, budget: u64 },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A decoder ordering or equivalence that must always hold was observed to fail.
    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    /// Internal consistency failure.
    #[error("internal error: {0}")]
    Internal(String),

    /// Malformed matrix or bundle file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
