//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A channel required for standardization has no variance.
    #[error("zero variance in channel {channel}")]
    ZeroVariance { channel: usize },

    /// The series is too short for the requested operation.
    #[error("insufficient data: {context}")]
    InsufficientData { context: String },

    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },

    /// A simulated trajectory left the finite range.
    #[error("trajectory diverged at step {step}")]
    Divergence { step: usize },

    #[error("shape mismatch: {context}")]
    Shape { context: String },

    /// Non-finite values appeared during optimization.
    #[error("numerical failure: {context}")]
    Numerical { context: String },

    /// The reference object is degenerate (e.g. all points identical).
    #[error("degenerate reference: {context}")]
    DegenerateReference { context: String },

    /// A CSV cell failed to parse as a number. Row/column are 1-based and
    /// count the header row if one is present.
    #[error("csv: non-numeric value {value:?} at row {row}, column {column}")]
    CsvParse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn insufficient(context: impl Into<String>) -> Self {
        Error::InsufficientData {
            context: context.into(),
        }
    }

    pub fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }

    pub fn shape(context: impl Into<String>) -> Self {
        Error::Shape {
            context: context.into(),
        }
    }

    pub fn numerical(context: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
        }
    }

    pub fn degenerate(context: impl Into<String>) -> Self {
        Error::DegenerateReference {
            context: context.into(),
        }
    }
}
