use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] svqkd::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for bad input, 2 when a computation could not complete.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(svqkd::Error::NumericalFailure(_))
            | CliError::Core(svqkd::Error::InsufficientData(_)) => 2,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 2,
            _ => 1,
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}
