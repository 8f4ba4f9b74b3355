use std::io;

use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// Unsupported or malformed content inside a named RIFF chunk.
    #[error("unsupported format in `{chunk}` chunk: {message}")]
    Format { chunk: String, message: String },

    /// Structural parse failure at a byte offset.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Parse failure in a text document, addressed by 1-based line (or CSV row).
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("symbol `{symbol}` is not in the alphabet of tape {tape}")]
    Alphabet { symbol: String, tape: usize },

    #[error("malformed label sequence: {0}")]
    Labels(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
