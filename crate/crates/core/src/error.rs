//! Error taxonomy shared by every module. The four variants map one-to-one
//! onto the CLI exit codes (config = 2, numeric = 3, data = 4).

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameter values (bad keys, out-of-range
    /// fields, inconsistent options).
    #[error("config error: {0}")]
    Config(String),

    /// A numeric routine failed to converge or left its stated contract.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed or inconsistent input data (edge lists, user tables).
    #[error("data error: {0}")]
    Data(String),

    /// An argument fell outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Filesystem-level failure while reading or writing artifacts.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
