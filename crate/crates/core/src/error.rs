use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x}, {y}) lies outside the closed unit disc")]
    Domain { x: f64, y: f64 },

    #[error("digit stream exhausted: digit {requested} requested, {available} available")]
    ExhaustedStream { requested: usize, available: usize },

    #[error("depth {depth} too small, at least {required} needed")]
    DepthTooSmall { depth: u32, required: u32 },

    #[error("enumeration of 2^{0} continuations exceeds the supported limit")]
    EnumerationTooLarge(u32),

    #[error("kernel is undefined on the diagonal t = x = {0}")]
    Diagonal(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
