use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range {lo}..={hi}")]
    Index { index: usize, lo: usize, hi: usize },

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("zero pivot at row {row}")]
    Singular { row: usize },

    #[error("singular diagonal block {block} after elimination")]
    SingularBlock { block: usize },

    #[error("grid too small: {what} needs N >= {min}, got N = {got}")]
    Size {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
