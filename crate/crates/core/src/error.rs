use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or outside its valid range.
    #[error("config `{key}`: {msg}")]
    Config { key: String, msg: String },

    /// Same as [`Error::Config`] but raised while parsing a config file.
    #[error("line {line}: config `{key}`: {msg}")]
    ConfigLine {
        key: String,
        line: usize,
        msg: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// Jain index is undefined for empty or all-zero inputs.
    #[error("fairness index undefined: {0}")]
    UndefinedFairness(&'static str),

    #[error("invalid scheduler input: {0}")]
    Scheduler(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
