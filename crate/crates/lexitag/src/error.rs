use thiserror::Error;

/// Toolkit-wide error type. Variants map onto the CLI exit-code classes:
/// usage/configuration problems exit 1, data problems exit 2, I/O exits 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Data(_) | Error::Parse(_) | Error::Numeric(_) | Error::Training(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
