use thiserror::Error;

/// Errors raised by the library. Each variant maps onto a process exit code
/// through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input (bad files, invalid parameters).
    #[error("input error: {0}")]
    Input(String),
    /// A model that cannot serve the requested operation.
    #[error("model error: {0}")]
    Model(String),
    /// An algorithm was handed arguments that break its documented contract.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    /// 2 for input problems, 3 for model problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Model(_) | Error::Contract(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
