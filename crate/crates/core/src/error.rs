use alloc::string::String;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A [`crate::CnrConfig`] that cannot work for the spectrum it is used with.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    /// The quantity is mathematically undefined for these inputs.
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}

pub(crate) use bail;
