use super::ast::Formula;

/// Predicate names longer than this draw a warning.
pub const MAX_PREDICATE_NAME_LEN: usize = 40;

/// A non-fatal observation about a well-formed formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lint {
    LongPredicateName { name: String, len: usize },
}

pub fn lint_formula(formula: &Formula) -> Vec<Lint> {
    let mut out: Vec<Lint> = Vec::new();
    formula.visit_preds(&mut |name, _| {
        if name.len() > MAX_PREDICATE_NAME_LEN
            && !out
                .iter()
                .any(|Lint::LongPredicateName { name: seen, .. }| seen == name)
        {
            out.push(Lint::LongPredicateName {
                name: name.to_string(),
                len: name.len(),
            });
        }
    });
    out
}
