use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interpolation points: {0}")]
    InvalidPoints(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for usage/configuration problems,
    /// 1 for runtime or numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidPoints(_) | Error::Parse(_) | Error::Config(_) | Error::Json(_) => 2,
            Error::Dimension(_) | Error::Numeric(_) | Error::Io(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
