use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The physical model cannot produce a value (e.g. a zero efficiency).
    #[error("model error: {0}")]
    Model(String),

    /// A configuration value breaks an invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An instance or record breaks a documented invariant.
    #[error("invariant violated for `{field}`: {message}")]
    Validation { field: String, message: String },

    /// No path satisfies the budget, not even the direct depot-to-depot one.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The exact solver refuses graphs above its size limit.
    #[error("exact solver refused: {interior} interior nodes exceeds the limit of {limit}")]
    TooLarge { interior: usize, limit: usize },

    /// The residual budget is exhausted; there is nothing left to plan.
    #[error("mission over: residual budget {budget:.6} kJ is not positive")]
    MissionOver { budget: f64 },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("audit failed: {0}")]
    Audit(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
