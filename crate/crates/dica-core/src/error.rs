//! Error types shared across the engine.

use thiserror::Error;

/// Errors produced by graph construction, inference, learning and I/O.
#[derive(Debug, Error)]
pub enum DicaError {
    /// A product of messages (or a backward projection) vanished everywhere.
    /// This signals an impossible combination of hard evidence, not a bug in
    /// the caller's data layout, so it is kept distinct from the other kinds.
    #[error("contradictory evidence: {0}")]
    ContradictoryEvidence(String),

    /// Vector/table shapes do not line up, or an index is out of range.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A requested configuration exceeds the supported product-space size.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A file (IDX, model document, ...) could not be parsed or validated.
    #[error("format error: {0}")]
    Format(String),

    /// An operation that needs the label block was called on a model without one.
    #[error("model has no label block")]
    MissingLabelBlock,

    /// A precondition or invariant violation in caller-supplied values.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl DicaError {
    /// Format error carrying the byte offset where parsing failed.
    pub fn format_at(offset: usize, message: impl std::fmt::Display) -> Self {
        DicaError::Format(format!("at byte {offset}: {message}"))
    }
}

pub type Result<T> = std::result::Result<T, DicaError>;
