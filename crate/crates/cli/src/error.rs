use thiserror::Error;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;
pub const EXIT_INCONSISTENCY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Core(#[from] gjms_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(gjms_core::Error::Domain(_)) => EXIT_USAGE,
            CliError::Core(gjms_core::Error::Inconsistency(_)) => EXIT_INCONSISTENCY,
            CliError::Core(_) => EXIT_ACCEPTANCE,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
