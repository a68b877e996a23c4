//! Crate-wide error type.

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A hypervector dimension of zero, or a dimension that does not fit the operation.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Two operands with different dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    /// A configuration value outside its legal range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A non-finite or otherwise unusable input value.
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// Cosine similarity against a zero-norm operand.
    #[error("undefined similarity: zero-norm operand")]
    UndefinedSimilarity,

    /// An operation that requires a non-empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Inference against an associative memory with a zero accumulator.
    #[error("untrained model: {0}")]
    UntrainedModel(String),

    /// A learning model that needs basis regeneration paired with an encoder
    /// that cannot provide it.
    #[error("unsupported encoder: {0}")]
    UnsupportedEncoder(String),

    /// Dataset ingestion failures (missing files, bad headers, short series).
    #[error("ingest error: {0}")]
    Ingest(String),

    /// Sample-cache or model-file format failures.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::InvalidConfig(_)
                | Error::DimMismatch { .. }
                | Error::UnsupportedEncoder(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
