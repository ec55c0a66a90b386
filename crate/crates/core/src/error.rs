//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (topology CSV, totals CSV, config file).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A topology source held no layer rows at all.
    #[error("empty topology: {0}")]
    EmptyTopology(String),

    /// Semantically invalid value; `subject` names the offending layer,
    /// field, or operand so the caller can point at its input.
    #[error("invalid {subject}: {message}")]
    Validation { subject: String, message: String },

    /// A MAC result left the representable accumulator range. Overflow is a
    /// hard stop, never a silent wraparound.
    #[error("accumulator overflow at PE ({row},{col}) on cycle {cycle}")]
    AccumulatorOverflow { row: usize, col: usize, cycle: u64 },

    /// Generating an operand trace would exceed the configured record cap.
    #[error("operand trace needs {required} records, cap is {cap}")]
    TraceCap { required: u128, cap: u64 },

    /// Schedule and fold plans disagree (length, order, or dataflow).
    #[error("schedule mismatch: {0}")]
    ScheduleMismatch(String),

    /// The event simulator contradicted its own injection schedule. This is
    /// a model bug, not a user error; it should never surface in practice.
    #[error("internal model inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            subject: subject.into(),
            message: message.into(),
        }
    }
}
