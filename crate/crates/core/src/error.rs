use std::path::PathBuf;

use thiserror::Error;

use crate::array::Shape;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: Shape, actual: Shape },

    #[error("data length {len} does not match shape {shape}")]
    LengthMismatch { shape: Shape, len: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid interval [{lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("transform index {index} out of range for family of size {size}")]
    TransformOutOfRange { index: usize, size: usize },

    #[error("invalid transform family: {0}")]
    InvalidFamily(String),

    #[error("all transformed weights have (near) zero norm")]
    DegenerateWeight,

    #[error("non-finite gradient at optimizer step {step}")]
    NonFiniteGradient { step: u64 },

    #[error("non-finite objective in component {component}, batch {batch}")]
    NonFiniteObjective { component: usize, batch: usize },

    #[error("component index {index} not in 1..={count}")]
    ComponentOutOfRange { index: usize, count: usize },

    #[error("sample {index} has zero norm")]
    ZeroNormSample { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic in {what}: expected {expected:02x?}, got {actual:02x?}")]
    BadMagic {
        what: &'static str,
        expected: Vec<u8>,
        actual: Vec<u8>,
    },

    #[error("truncated {what}: expected {expected} bytes, found {actual}")]
    Truncated {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
