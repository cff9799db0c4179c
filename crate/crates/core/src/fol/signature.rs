use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Formula, Term};
use super::error::{ArityConflict, SyntaxError};

/// Predicate arities and constant names shared by a set of formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty() && self.constants.is_empty()
    }
}

/// Unifies the signatures of `formulas`.
///
/// When several predicates conflict, the lexicographically smallest name is
/// reported so the result does not depend on input order.
pub fn collect_signature<'a, I>(formulas: I) -> Result<Signature, SyntaxError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    // arities per predicate, in first-seen order
    let mut arities: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut constants = BTreeSet::new();
    for formula in formulas {
        formula.visit_preds(&mut |name, args| {
            let seen = arities.entry(name).or_default();
            if !seen.contains(&args.len()) {
                seen.push(args.len());
            }
            for arg in args {
                if let Term::Constant(c) = arg {
                    constants.insert(c.clone());
                }
            }
        });
    }
    if let Some((name, seen)) = arities.iter().find(|(_, seen)| seen.len() > 1) {
        return Err(SyntaxError::arity(ArityConflict {
            predicate: name.to_string(),
            first: seen[0],
            second: seen[1],
        }));
    }
    Ok(Signature {
        predicates: arities
            .into_iter()
            .map(|(name, seen)| (name.to_string(), seen[0]))
            .collect(),
        constants,
    })
}
