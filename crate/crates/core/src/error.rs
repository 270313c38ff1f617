//! Library error type and classification for process exit codes.

use thiserror::Error;

/// Errors produced by any module of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A stream, profile, or matrix does not match the declared layout.
    #[error("layout error: {0}")]
    Layout(String),

    /// A numeric argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index is outside the valid range.
    #[error("index error: {0}")]
    Index(String),

    /// An operation that needs shot-layout metadata was given a bare stream.
    #[error("missing layout: {0}")]
    MissingLayout(&'static str),

    /// A bit file contains bytes that do not belong to the format.
    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    /// Declared and actual lengths disagree.
    #[error("length error: {0}")]
    Length(String),

    /// Mismatched matrix or distribution shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// A statistic is undefined on the given input (zero variance,
    /// constant sequence, constant mean curve).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A file-backed random source ran out of integers.
    #[error("source exhausted: {0}")]
    Exhausted(String),

    /// Training produced a non-finite loss.
    #[error("training diverged: {0}")]
    Diverged(String),

    /// An experiment configuration could not be understood.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Caller passed arguments that can never work (exit 2).
    Usage,
    /// Input data is malformed, truncated, or exhausted (exit 3).
    Data,
    /// The requested statistic is undefined on this input (exit 4).
    Degeneracy,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Layout(_)
            | Error::Domain(_)
            | Error::Index(_)
            | Error::MissingLayout(_)
            | Error::Shape(_)
            | Error::Config(_) => ErrorCategory::Usage,
            Error::Parse { .. }
            | Error::Length(_)
            | Error::Exhausted(_)
            | Error::Diverged(_)
            | Error::Io(_) => ErrorCategory::Data,
            Error::Degenerate(_) => ErrorCategory::Degeneracy,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
