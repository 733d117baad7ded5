use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent user input.
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] robust_ftap::Error),
    /// A computed certificate failed its own transcript.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// 1 for input errors, 2 when the enumeration cap is exceeded and 3 for
    /// broken internal assertions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 1,
            CliError::Core(robust_ftap::Error::EnumerationCapExceeded { .. }) => 2,
            CliError::Core(e) if e.is_internal() => 3,
            CliError::Core(_) => 1,
            CliError::Internal(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
