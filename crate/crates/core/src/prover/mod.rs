//! Three-way entailment by resolution refutation, plus a finite-model
//! oracle for cross-checking.

mod clause;
mod clausify;
mod entailment;
mod oracle;
mod resolution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use clause::{CTerm, Clause, Literal, Symbol, SymbolId, SymbolTable};
pub use clausify::{Clausifier, ClausifyOverflow};
pub use entailment::{classify_entailment, AttemptTrace, Entailment, EntailmentTrace};
pub use oracle::{
    ground_oracle, ground_oracle_capped, Model, OracleError, OracleReport, OracleVerdict,
    DEFAULT_MAX_ASSIGNMENTS,
};
pub use resolution::{refute, ProofResult, ProofStatus, ResourceLimits};

/// The task's answer space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Uncertain,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::True, Label::False, Label::Uncertain];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "True",
            Label::False => "False",
            Label::Uncertain => "Uncertain",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::True => 0,
            Label::False => 1,
            Label::Uncertain => 2,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(Label::True),
            "false" => Ok(Label::False),
            "uncertain" => Ok(Label::Uncertain),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}
