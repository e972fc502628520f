use std::fmt;

use thiserror::Error;

/// Failures while decoding a binary PGM stream. Every variant carries the byte
/// offset at which decoding stopped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("bad magic at byte {offset}: expected \"P5\"")]
    BadMagic { offset: usize },
    #[error("malformed {field} at byte {offset}")]
    MalformedHeader { field: HeaderField, offset: usize },
    #[error("zero {field} at byte {offset}")]
    ZeroDimension { field: HeaderField, offset: usize },
    #[error("unsupported maxval {maxval} at byte {offset}: only 255 is accepted")]
    UnsupportedMaxval { maxval: u32, offset: usize },
    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated { offset: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderField {
    Width,
    Height,
    Maxval,
    Separator,
}

impl fmt::Display for HeaderField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeaderField::Width => "width",
            HeaderField::Height => "height",
            HeaderField::Maxval => "maxval",
            HeaderField::Separator => "header separator",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate or parameter outside its documented domain.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported image: {width}x{height} (need at least 2x2)")]
    UnsupportedImage { width: usize, height: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("invalid image buffer: {0}")]
    InvalidImage(String),
    #[error("pgm: {0}")]
    Pgm(#[from] PgmError),
    #[error("png: {0}")]
    Png(String),
    /// A tone interval table that breaks one of its invariants.
    #[error("invalid interval table: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
