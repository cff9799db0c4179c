//! Brute-force finite-model enumeration, used as an independent check on
//! the resolution prover for small problems.
//!
//! Every interpretation over domains of size `1..=max_domain` is visited:
//! each constant is mapped to some element and each ground atom is given a
//! truth value. Nothing here shares code with the clausifier or the
//! resolution loop.

use std::collections::BTreeMap;

use serde::Serialize;

use super::Label;
use crate::fol::{Formula, Term};

pub const DEFAULT_MAX_ASSIGNMENTS: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleVerdict {
    Label(Label),
    /// No model of the premises exists within the searched domains.
    /// `definitive` is set when that proves the premises unsatisfiable (they
    /// are quantifier-free and every constant could get its own element).
    Undecided { definitive: bool },
}

/// One finite interpretation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Model {
    pub domain_size: usize,
    /// Constant name to element index.
    pub constants: BTreeMap<String, usize>,
    /// Atoms that hold, e.g. `("Likes", [0, 1])`.
    pub true_atoms: Vec<(String, Vec<usize>)>,
}

impl Model {
    pub fn holds(&self, predicate: &str, elements: &[usize]) -> bool {
        self.true_atoms
            .iter()
            .any(|(p, args)| p == predicate && args.as_slice() == elements)
    }

    /// Truth value of a ground atom `predicate(constants..)`.
    pub fn holds_for(&self, predicate: &str, constants: &[&str]) -> Option<bool> {
        let elems: Option<Vec<usize>> = constants
            .iter()
            .map(|c| self.constants.get(*c).copied())
            .collect();
        Some(self.holds(predicate, &elems?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub verdict: OracleVerdict,
    /// A model of the premises in which the conclusion holds.
    pub model_with_conclusion: Option<Model>,
    /// A model of the premises in which the conclusion fails.
    pub model_without_conclusion: Option<Model>,
    pub interpretations_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("interpretation count {needed} exceeds cap {cap}")]
    ResourceOut { needed: u64, cap: u64 },
    #[error("predicate {0} used with inconsistent arities")]
    ArityMismatch(String),
}

pub fn ground_oracle(
    premises: &[Formula],
    conclusion: &Formula,
    max_domain: usize,
) -> Result<OracleReport, OracleError> {
    ground_oracle_capped(premises, conclusion, max_domain, DEFAULT_MAX_ASSIGNMENTS)
}

pub fn ground_oracle_capped(
    premises: &[Formula],
    conclusion: &Formula,
    max_domain: usize,
    max_assignments: u64,
) -> Result<OracleReport, OracleError> {
    let mut vocab = Vocabulary::default();
    let compiled_premises: Vec<Node> = premises
        .iter()
        .map(|f| vocab.compile(f, &mut Vec::new()))
        .collect::<Result<_, _>>()?;
    let compiled_conclusion = vocab.compile(conclusion, &mut Vec::new())?;

    let mut total: u64 = 0;
    for n in 1..=max_domain.max(1) {
        let count = vocab.interpretations(n).ok_or(OracleError::ResourceOut {
            needed: u64::MAX,
            cap: max_assignments,
        })?;
        total = total.saturating_add(count);
    }
    if total > max_assignments {
        return Err(OracleError::ResourceOut {
            needed: total,
            cap: max_assignments,
        });
    }

    let mut with = None;
    let mut without = None;
    let mut checked = 0u64;
    for n in 1..=max_domain.max(1) {
        let atoms = vocab.atom_count(n);
        let const_maps = (n as u64).pow(vocab.constants.len() as u32);
        for cmap in 0..const_maps {
            let constants = decode_digits(cmap, n, vocab.constants.len());
            for bits in 0..(1u64 << atoms) {
                checked += 1;
                let interp = Interp {
                    n,
                    constants: &constants,
                    bits,
                    vocab: &vocab,
                };
                let mut env = Vec::new();
                if !compiled_premises.iter().all(|p| interp.eval(p, &mut env)) {
                    continue;
                }
                let holds = interp.eval(&compiled_conclusion, &mut env);
                let slot = if holds { &mut with } else { &mut without };
                if slot.is_none() {
                    *slot = Some(interp.to_model());
                }
            }
        }
    }

    let verdict = match (&with, &without) {
        (Some(_), Some(_)) => OracleVerdict::Label(Label::Uncertain),
        (Some(_), None) => OracleVerdict::Label(Label::True),
        (None, Some(_)) => OracleVerdict::Label(Label::False),
        (None, None) => {
            let ground = premises.iter().all(|p| p.quantifier_depth() == 0);
            OracleVerdict::Undecided {
                definitive: ground && max_domain >= vocab.constants.len().max(1),
            }
        }
    };
    Ok(OracleReport {
        verdict,
        model_with_conclusion: with,
        model_without_conclusion: without,
        interpretations_checked: checked,
    })
}

fn decode_digits(mut value: u64, base: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((value % base as u64) as usize);
        value /= base as u64;
    }
    out
}

#[derive(Default)]
struct Vocabulary {
    predicates: Vec<(String, usize)>,
    constants: Vec<String>,
}

enum Arg {
    Const(usize),
    // de Bruijn-style index into the environment stack
    Bound(usize),
}

enum Node {
    Atom(usize, Vec<Arg>),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    ForAll(Box<Node>),
    Exists(Box<Node>),
}

impl Vocabulary {
    fn compile(&mut self, f: &Formula, scope: &mut Vec<String>) -> Result<Node, OracleError> {
        let bin = |s: &mut Self, a: &Formula, b: &Formula, scope: &mut Vec<String>| {
            Ok::<_, OracleError>((Box::new(s.compile(a, scope)?), Box::new(s.compile(b, scope)?)))
        };
        Ok(match f {
            Formula::Pred { name, args } => {
                let idx = match self.predicates.iter().position(|(p, _)| p == name) {
                    Some(i) if self.predicates[i].1 != args.len() => {
                        return Err(OracleError::ArityMismatch(name.clone()))
                    }
                    Some(i) => i,
                    None => {
                        self.predicates.push((name.clone(), args.len()));
                        self.predicates.len() - 1
                    }
                };
                let args = args
                    .iter()
                    .map(|t| {
                        let name = t.name();
                        let bound = matches!(t, Term::Variable(_))
                            .then(|| scope.iter().rposition(|v| v == name))
                            .flatten();
                        match bound {
                            Some(pos) => Arg::Bound(pos),
                            None => Arg::Const(self.constant(name)),
                        }
                    })
                    .collect();
                Node::Atom(idx, args)
            }
            Formula::Not(a) => Node::Not(Box::new(self.compile(a, scope)?)),
            Formula::And(a, b) => {
                let (a, b) = bin(self, a, b, scope)?;
                Node::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = bin(self, a, b, scope)?;
                Node::Or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = bin(self, a, b, scope)?;
                Node::Implies(a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = bin(self, a, b, scope)?;
                Node::Iff(a, b)
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                scope.push(v.clone());
                let body = self.compile(body, scope);
                scope.pop();
                let body = Box::new(body?);
                if matches!(f, Formula::ForAll(..)) {
                    Node::ForAll(body)
                } else {
                    Node::Exists(body)
                }
            }
        })
    }

    fn constant(&mut self, name: &str) -> usize {
        match self.constants.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                self.constants.push(name.to_string());
                self.constants.len() - 1
            }
        }
    }

    fn atom_count(&self, n: usize) -> u32 {
        self.predicates
            .iter()
            .map(|(_, arity)| (n as u32).pow(*arity as u32))
            .sum()
    }

    fn interpretations(&self, n: usize) -> Option<u64> {
        let atoms = self.atom_count(n);
        if atoms >= 63 {
            return None;
        }
        (n as u64)
            .checked_pow(self.constants.len() as u32)?
            .checked_mul(1u64 << atoms)
    }

    fn atom_offset(&self, pred: usize, n: usize) -> usize {
        self.predicates[..pred]
            .iter()
            .map(|(_, arity)| n.pow(*arity as u32))
            .sum()
    }
}

struct Interp<'a> {
    n: usize,
    constants: &'a [usize],
    bits: u64,
    vocab: &'a Vocabulary,
}

impl Interp<'_> {
    fn eval(&self, node: &Node, env: &mut Vec<usize>) -> bool {
        match node {
            Node::Atom(pred, args) => {
                let mut index = 0;
                for arg in args {
                    let elem = match arg {
                        Arg::Const(c) => self.constants[*c],
                        Arg::Bound(pos) => env[*pos],
                    };
                    index = index * self.n + elem;
                }
                let bit = self.vocab.atom_offset(*pred, self.n) + index;
                self.bits >> bit & 1 == 1
            }
            Node::Not(a) => !self.eval(a, env),
            Node::And(a, b) => self.eval(a, env) && self.eval(b, env),
            Node::Or(a, b) => self.eval(a, env) || self.eval(b, env),
            Node::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Node::Iff(a, b) => self.eval(a, env) == self.eval(b, env),
            Node::ForAll(body) => (0..self.n).all(|e| {
                env.push(e);
                let r = self.eval(body, env);
                env.pop();
                r
            }),
            Node::Exists(body) => (0..self.n).any(|e| {
                env.push(e);
                let r = self.eval(body, env);
                env.pop();
                r
            }),
        }
    }

    fn to_model(&self) -> Model {
        let mut true_atoms = Vec::new();
        for (p, (name, arity)) in self.vocab.predicates.iter().enumerate() {
            let offset = self.vocab.atom_offset(p, self.n);
            for index in 0..self.n.pow(*arity as u32) {
                if self.bits >> (offset + index) & 1 == 1 {
                    let mut args = decode_digits(index as u64, self.n, *arity);
                    args.reverse();
                    true_atoms.push((name.clone(), args));
                }
            }
        }
        Model {
            domain_size: self.n,
            constants: self
                .vocab
                .constants
                .iter()
                .cloned()
                .zip(self.constants.iter().copied())
                .collect(),
            true_atoms,
        }
    }
}
