use std::io;

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cnr_core::Error),
    #[error("cannot read {path}: {source}")]
    Input { path: String, source: io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

impl AppError {
    /// 1 usage, 2 validation, 3 resource.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Core(cnr_core::Error::Resource(_)) | AppError::Output { .. } => 3,
            AppError::Core(_) | AppError::Input { .. } | AppError::Format { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
