//! The formula dialect: lexing, parsing, rendering, signatures and lints.
//!
//! Tokens are `all`, `exists`, `.`, `(`, `)`, `,`, `&`, `|`, `-`, `->`,
//! `<->` and identifiers `[A-Za-z_][A-Za-z0-9_]*`. The comparison symbols
//! `<`, `>` and `=` are rejected unless they are part of `->` or `<->`.

mod ast;
mod error;
mod lexer;
mod lint;
mod parser;
mod signature;

pub use ast::{Formula, Term};
pub use error::{ArityConflict, SyntaxError, SyntaxErrorClass};
pub use lint::{lint_formula, Lint, MAX_PREDICATE_NAME_LEN};
pub use parser::{looks_like_variable, parse_formula};
pub use signature::{collect_signature, Signature};

/// Inverse of [`parse_formula`].
pub fn render_formula(formula: &Formula) -> String {
    formula.render()
}
