use thiserror::Error;

#[derive(Debug, Error)]
pub enum DoaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure at iteration {iteration}: {reason}")]
    Numerical { iteration: usize, reason: String },

    #[error("dataset format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = DoaError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> DoaError {
    DoaError::InvalidArgument(msg.into())
}
