use serde::{Deserialize, Serialize};
use std::fmt;

/// Why a formula (or a set of formulas) was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SyntaxErrorClass {
    UnexpectedToken,
    ArityMismatch,
    EmptyPredicate,
    ForbiddenSymbol,
    UnboundVariable,
}

impl fmt::Display for SyntaxErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SyntaxErrorClass::UnexpectedToken => "UnexpectedToken",
            SyntaxErrorClass::ArityMismatch => "ArityMismatch",
            SyntaxErrorClass::EmptyPredicate => "EmptyPredicate",
            SyntaxErrorClass::ForbiddenSymbol => "ForbiddenSymbol",
            SyntaxErrorClass::UnboundVariable => "UnboundVariable",
        };
        f.write_str(s)
    }
}

/// A predicate used with two different argument counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArityConflict {
    pub predicate: String,
    pub first: usize,
    pub second: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{class} at byte {position}: {message}")]
pub struct SyntaxError {
    pub class: SyntaxErrorClass,
    /// Byte offset into the input; equal to the input length for errors at
    /// end of input.
    pub position: usize,
    pub message: String,
    /// Set only for `ArityMismatch`.
    pub conflict: Option<ArityConflict>,
}

impl SyntaxError {
    pub fn new(class: SyntaxErrorClass, position: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            class,
            position,
            message: message.into(),
            conflict: None,
        }
    }

    pub fn arity(conflict: ArityConflict) -> Self {
        let message = format!(
            "predicate {} used with {} and {} arguments",
            conflict.predicate, conflict.first, conflict.second
        );
        SyntaxError {
            class: SyntaxErrorClass::ArityMismatch,
            position: 0,
            message,
            conflict: Some(conflict),
        }
    }

    /// Shifts the position by `offset`, for formulas embedded in larger text.
    pub fn offset_by(mut self, offset: usize) -> Self {
        self.position += offset;
        self
    }
}
