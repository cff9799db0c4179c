use serde::{Deserialize, Serialize};

use super::clausify::Clausifier;
use super::resolution::{refute, ProofResult, ProofStatus, ResourceLimits};
use super::Label;
use crate::fol::{collect_signature, Formula, SyntaxError, SyntaxErrorClass};

/// Summary of one refutation attempt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptTrace {
    pub status: ProofStatus,
    pub clauses_generated: usize,
    pub elapsed: f64,
}

impl From<ProofResult> for AttemptTrace {
    fn from(r: ProofResult) -> Self {
        AttemptTrace {
            status: r.status,
            clauses_generated: r.clauses_generated,
            elapsed: r.elapsed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntailmentTrace {
    /// Refutation of premises plus the negated conclusion.
    pub prove_conclusion: AttemptTrace,
    /// Refutation of premises plus the conclusion; skipped when the first
    /// attempt succeeds.
    pub prove_negation: Option<AttemptTrace>,
    /// Refutation of the premises alone; only run when neither attempt
    /// saturated, since a saturated attempt already exhibits consistency.
    pub premises_only: Option<AttemptTrace>,
    pub inconsistent_premises: bool,
    pub resource_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entailment {
    pub label: Label,
    pub trace: EntailmentTrace,
}

/// Three-way entailment decision.
///
/// True when the premises refute the negated conclusion, otherwise False
/// when they refute the conclusion, otherwise Uncertain. Running out of
/// resources yields Uncertain with `resource_exhausted` set.
pub fn classify_entailment(
    premises: &[Formula],
    conclusion: &Formula,
    limits: &ResourceLimits,
) -> Result<Entailment, SyntaxError> {
    collect_signature(premises.iter().chain(std::iter::once(conclusion)))?;
    if let Some(var) = premises
        .iter()
        .chain(std::iter::once(conclusion))
        .find_map(|f| f.free_variables().into_iter().next())
    {
        return Err(SyntaxError::new(
            SyntaxErrorClass::UnboundVariable,
            0,
            format!("variable `{var}` is not bound by any quantifier"),
        ));
    }

    let mut clausifier = Clausifier::new(limits.max_clauses);
    let premise_clauses: Option<Vec<_>> = premises
        .iter()
        .map(|p| clausifier.clausify(p).ok())
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    let negated = clausifier.clausify_negated(conclusion).ok();
    let asserted = clausifier.clausify(conclusion).ok();

    let attempt = |extra: &Option<Vec<_>>| -> AttemptTrace {
        match (&premise_clauses, extra) {
            (Some(base), Some(extra)) => {
                let mut all = base.clone();
                all.extend(extra.iter().cloned());
                refute(&all, limits).into()
            }
            _ => AttemptTrace {
                status: ProofStatus::ResourceOut,
                clauses_generated: 0,
                elapsed: 0.0,
            },
        }
    };

    let first = attempt(&negated);
    let second = (first.status != ProofStatus::Proved).then(|| attempt(&asserted));
    let saturated = first.status == ProofStatus::Saturated
        || second.is_some_and(|s| s.status == ProofStatus::Saturated);
    let premises_only = (!saturated).then(|| attempt(&Some(Vec::new())));

    let label = if first.status == ProofStatus::Proved {
        Label::True
    } else if second.is_some_and(|s| s.status == ProofStatus::Proved) {
        Label::False
    } else {
        Label::Uncertain
    };
    let resource_exhausted = [Some(first), second, premises_only]
        .iter()
        .flatten()
        .any(|a| a.status == ProofStatus::ResourceOut);
    let inconsistent_premises = premises_only.is_some_and(|a| a.status == ProofStatus::Proved);
    Ok(Entailment {
        label,
        trace: EntailmentTrace {
            prove_conclusion: first,
            prove_negation: second,
            premises_only,
            inconsistent_premises,
            resource_exhausted,
        },
    })
}
