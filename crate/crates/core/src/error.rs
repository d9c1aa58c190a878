use thiserror::Error;

/// Errors produced by game construction, solvers and verifiers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A payoff table does not match the declared strategy counts.
    #[error("dimension mismatch on axis {axis}: {detail}")]
    Dimension { axis: String, detail: String },

    /// An index, parameter or argument is out of its allowed range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A modelling assumption (distinct valuations, distinct payoffs, ...) is violated.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// An enumeration would exceed the configured size cap.
    #[error("size cap exceeded: {what} would enumerate {count} items (cap {cap})")]
    SizeCap {
        what: String,
        count: u128,
        cap: u128,
    },

    /// A strategy broke a structural rule of the game it is played in.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Exact arithmetic left the representable range.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn size_cap(what: impl Into<String>, count: u128, cap: u128) -> Self {
        Error::SizeCap {
            what: what.into(),
            count,
            cap,
        }
    }
}
