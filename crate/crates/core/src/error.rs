//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible array dimensions.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input outside an operation's domain (empty vector, zero-norm token, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent configuration (bad schedule, out-of-range drop count, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Arithmetic produced a non-finite or otherwise unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed STTN tensor file.
    #[error("tensor format error: {0}")]
    Format(#[from] FormatError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Field-level decode failures for the STTN tensor file format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("field `magic`: expected \"STTN\", found {found:?}")]
    Magic { found: [u8; 4] },

    #[error("field `version`: expected 1, found {found}")]
    Version { found: u8 },

    #[error("field `dtype`: expected 1 (f32 little-endian), found {found}")]
    Dtype { found: u8 },

    /// The header ended before the named field could be read.
    #[error("field `{field}`: header truncated")]
    Header { field: &'static str },

    /// Payload shorter than the dims declare.
    #[error("field `data`: dims declare {expected} f32 values, payload holds {found}")]
    Truncated { expected: usize, found: usize },

    /// Payload longer than the dims declare.
    #[error("field `data`: {extra} trailing bytes after declared payload")]
    Trailing { extra: usize },
}
