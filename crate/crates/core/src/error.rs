use thiserror::Error;

/// Errors produced by the state model, the swap engine, and the analysis
/// routines built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmmError {
    /// A token symbol failed validation.
    #[error("invalid token: {0}")]
    InvalidToken(String),

    /// A pool share or pool lookup was attempted over a non-distinct pair.
    #[error("invalid pair: the two tokens must be distinct")]
    InvalidPair,

    /// A numeric argument fell outside the mathematical domain of the
    /// function (non-positive reserve, NaN amount, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// No pool exists for the requested token pair.
    #[error("no pool for pair {0}/{1}")]
    NoPool(String, String),

    /// The sender does not hold enough of the input token.
    #[error("insufficient balance: {account} holds {held} {token}, needs {needed}")]
    InsufficientBalance {
        account: String,
        token: String,
        held: f64,
        needed: f64,
    },

    /// Swap amounts must be strictly positive.
    #[error("swap amount must be strictly positive")]
    NonPositiveAmount,

    /// The price oracle has no entry for a token.
    #[error("no oracle price for token {0}")]
    MissingPrice(String),

    /// A sampling range was empty or degenerate.
    #[error("invalid range: {0}")]
    InvalidRange(String),

    /// A loaded document violated a type invariant; `path` locates the
    /// offending field.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    /// A document could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),
}

impl AmmError {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        AmmError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
