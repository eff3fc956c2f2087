use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by the physics modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} outside its domain: {detail}")]
    Domain { quantity: &'static str, detail: String },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("non-physical result: {0}")]
    NonPhysical(String),

    #[error("invalid {field}: {detail}")]
    Validation { field: String, detail: String },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. }
            | Error::Inconsistent(_)
            | Error::Validation { .. }
            | Error::InsufficientData { .. }
            | Error::Config(_) => 3,
            Error::NonPhysical(_) | Error::FitFailure(_) | Error::Numeric(_) => 4,
            Error::Io(_) => 1,
        }
    }

    pub(crate) fn domain(quantity: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { quantity, detail: detail.into() }
    }

    pub(crate) fn validation(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), detail: detail.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
