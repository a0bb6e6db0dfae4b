use thiserror::Error;

/// Errors raised by the sampler, the numeric kernels and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error at row {row}, column `{column}`: {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad user input (configuration or data files),
    /// as opposed to numerical or I/O failures during a run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Data { .. } | Error::InvalidArgument(_) | Error::Json(_)
        )
    }
}
