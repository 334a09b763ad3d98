use thiserror::Error;

/// Errors shared by every layer of the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated an operation's precondition (unknown vertex,
    /// cyclic graph, zero-probability conditioning event, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration guard was exceeded.
    #[error("capacity exceeded: {what} needs {required}, limit is {limit}")]
    Capacity {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    /// Invalid run configuration (budget, horizon, parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Random instance generation exhausted its retry budget.
    #[error("generation failed after {attempts} attempts: {violated}")]
    Generation { attempts: usize, violated: String },

    /// Model validation produced one or more violations.
    #[error("invalid model: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
