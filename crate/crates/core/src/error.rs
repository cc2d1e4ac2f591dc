//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Raster dimensions and buffer length (or two rasters) disagree.
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// A pixel or parameter value is NaN or infinite.
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    /// An operation that needs at least one element received none.
    #[error("empty set: {0}")]
    EmptySet(&'static str),

    /// Epoch index outside 0..=total_epochs.
    #[error("epoch {epoch} out of range 0..={max}")]
    EpochOutOfRange { epoch: u32, max: u32 },

    /// An augmentation parameter lies outside its declared range.
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A detection or annotation references an image id with no record.
    #[error("unknown image id: {0}")]
    UnknownImageId(String),

    /// A configuration record violates one of its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
