use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: projection undefined by this implementation's convention")]
    DegenerateInput,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("negative value {value} at position {index}")]
    Negative { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("malformed CSV at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the contents of user data rather than by
    /// the way the library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DegenerateInput
                | Error::NonFinite(_)
                | Error::Negative { .. }
                | Error::Shape(_)
                | Error::Csv { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
