//! Formula to clause conversion: negation normal form, Skolemization and
//! distribution of disjunction over conjunction.

use std::collections::BTreeSet;

use super::clause::{CTerm, Clause, Literal, Symbol, SymbolTable};
use crate::fol::{Formula, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("clause limit exceeded during CNF conversion")]
pub struct ClausifyOverflow;

#[derive(Clone, Debug)]
enum Nnf {
    Lit(Literal),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    ForAll(u32, Box<Nnf>),
    Exists(u32, Box<Nnf>),
}

/// Converts formulas of one problem into clauses over a shared symbol
/// table, so Skolem symbols are never reused across formulas.
#[derive(Debug)]
pub struct Clausifier {
    pub symbols: SymbolTable,
    next_skolem: u32,
    next_var: u32,
    max_clauses: usize,
}

impl Clausifier {
    pub fn new(max_clauses: usize) -> Self {
        Clausifier {
            symbols: SymbolTable::default(),
            next_skolem: 0,
            next_var: 0,
            max_clauses,
        }
    }

    pub fn clausify(&mut self, formula: &Formula) -> Result<Vec<Clause>, ClausifyOverflow> {
        self.clausify_polarity(formula, true)
    }

    /// Clauses for the negation of `formula`.
    pub fn clausify_negated(&mut self, formula: &Formula) -> Result<Vec<Clause>, ClausifyOverflow> {
        self.clausify_polarity(formula, false)
    }

    fn clausify_polarity(
        &mut self,
        formula: &Formula,
        positive: bool,
    ) -> Result<Vec<Clause>, ClausifyOverflow> {
        let mut scope = Vec::new();
        let nnf = self.nnf(formula, positive, &mut scope);
        let mut universals = Vec::new();
        let mut bindings = Vec::new();
        let matrix = self.skolemize(nnf, &mut universals, &mut bindings);
        let raw = distribute(&matrix, self.max_clauses)?;
        Ok(raw.into_iter().filter_map(Clause::normalized).collect())
    }

    fn fresh_var(&mut self) -> u32 {
        self.next_var += 1;
        self.next_var - 1
    }

    fn nnf(&mut self, f: &Formula, positive: bool, scope: &mut Vec<(String, u32)>) -> Nnf {
        match f {
            Formula::Pred { name, args } => {
                let predicate = self.symbols.predicate(name);
                let args = args
                    .iter()
                    .map(|t| match t {
                        Term::Variable(v) => match scope.iter().rev().find(|(n, _)| n == v) {
                            Some((_, id)) => CTerm::Var(*id),
                            None => CTerm::App(self.symbols.function(Symbol::Named(v.clone())), vec![]),
                        },
                        Term::Constant(c) => {
                            CTerm::App(self.symbols.function(Symbol::Named(c.clone())), vec![])
                        }
                    })
                    .collect();
                Nnf::Lit(Literal {
                    positive,
                    predicate,
                    args,
                })
            }
            Formula::Not(inner) => self.nnf(inner, !positive, scope),
            Formula::And(a, b) => {
                let (a, b) = (self.nnf(a, positive, scope), self.nnf(b, positive, scope));
                if positive {
                    Nnf::And(Box::new(a), Box::new(b))
                } else {
                    Nnf::Or(Box::new(a), Box::new(b))
                }
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.nnf(a, positive, scope), self.nnf(b, positive, scope));
                if positive {
                    Nnf::Or(Box::new(a), Box::new(b))
                } else {
                    Nnf::And(Box::new(a), Box::new(b))
                }
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.nnf(a, !positive, scope), self.nnf(b, positive, scope));
                if positive {
                    Nnf::Or(Box::new(a), Box::new(b))
                } else {
                    Nnf::And(Box::new(a), Box::new(b))
                }
            }
            Formula::Iff(a, b) => {
                // positive: (-a | b) & (a | -b); negative: (a & -b) | (-a & b)
                let left = Formula::implies((**a).clone(), (**b).clone());
                let right = Formula::implies((**b).clone(), (**a).clone());
                if positive {
                    let l = self.nnf(&left, true, scope);
                    let r = self.nnf(&right, true, scope);
                    Nnf::And(Box::new(l), Box::new(r))
                } else {
                    let l = self.nnf(&left, false, scope);
                    let r = self.nnf(&right, false, scope);
                    Nnf::Or(Box::new(l), Box::new(r))
                }
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let id = self.fresh_var();
                scope.push((v.clone(), id));
                let body = self.nnf(body, positive, scope);
                scope.pop();
                let universal = matches!(f, Formula::ForAll(..)) == positive;
                if universal {
                    Nnf::ForAll(id, Box::new(body))
                } else {
                    Nnf::Exists(id, Box::new(body))
                }
            }
        }
    }

    fn skolemize(
        &mut self,
        f: Nnf,
        universals: &mut Vec<u32>,
        bindings: &mut Vec<(u32, CTerm)>,
    ) -> Nnf {
        match f {
            Nnf::Lit(lit) => Nnf::Lit(Literal {
                args: lit.args.iter().map(|a| substitute(a, bindings)).collect(),
                ..lit
            }),
            Nnf::And(a, b) => Nnf::And(
                Box::new(self.skolemize(*a, universals, bindings)),
                Box::new(self.skolemize(*b, universals, bindings)),
            ),
            Nnf::Or(a, b) => Nnf::Or(
                Box::new(self.skolemize(*a, universals, bindings)),
                Box::new(self.skolemize(*b, universals, bindings)),
            ),
            Nnf::ForAll(v, body) => {
                universals.push(v);
                let body = self.skolemize(*body, universals, bindings);
                universals.pop();
                body
            }
            Nnf::Exists(v, body) => {
                let mut free = BTreeSet::new();
                free_vars(&body, &mut free);
                // Skolem arguments: enclosing universals the body depends on,
                // including through earlier Skolem terms.
                let deps: Vec<u32> = universals
                    .iter()
                    .copied()
                    .filter(|u| {
                        free.contains(u)
                            || bindings
                                .iter()
                                .any(|(b, t)| free.contains(b) && term_mentions(t, *u))
                    })
                    .collect();
                let index = self.next_skolem;
                self.next_skolem += 1;
                let sym = self.symbols.function(Symbol::Skolem {
                    index,
                    arity: deps.len(),
                });
                let term = CTerm::App(sym, deps.into_iter().map(CTerm::Var).collect());
                bindings.push((v, term));
                let body = self.skolemize(*body, universals, bindings);
                bindings.pop();
                body
            }
        }
    }
}

fn free_vars(f: &Nnf, out: &mut BTreeSet<u32>) {
    match f {
        Nnf::Lit(lit) => {
            for a in &lit.args {
                term_vars(a, out);
            }
        }
        Nnf::And(a, b) | Nnf::Or(a, b) => {
            free_vars(a, out);
            free_vars(b, out);
        }
        // Variable ids are unique per quantifier, so no removal is needed
        // for correctness of the dependency check.
        Nnf::ForAll(_, body) | Nnf::Exists(_, body) => free_vars(body, out),
    }
}

fn term_vars(t: &CTerm, out: &mut BTreeSet<u32>) {
    match t {
        CTerm::Var(v) => {
            out.insert(*v);
        }
        CTerm::App(_, args) => args.iter().for_each(|a| term_vars(a, out)),
    }
}

fn term_mentions(t: &CTerm, v: u32) -> bool {
    match t {
        CTerm::Var(x) => *x == v,
        CTerm::App(_, args) => args.iter().any(|a| term_mentions(a, v)),
    }
}

fn substitute(t: &CTerm, bindings: &[(u32, CTerm)]) -> CTerm {
    match t {
        CTerm::Var(v) => bindings
            .iter()
            .rev()
            .find(|(b, _)| b == v)
            .map(|(_, term)| term.clone())
            .unwrap_or_else(|| t.clone()),
        CTerm::App(f, args) => CTerm::App(*f, args.iter().map(|a| substitute(a, bindings)).collect()),
    }
}

fn distribute(f: &Nnf, max_clauses: usize) -> Result<Vec<Vec<Literal>>, ClausifyOverflow> {
    match f {
        Nnf::Lit(lit) => Ok(vec![vec![lit.clone()]]),
        Nnf::And(a, b) => {
            let mut left = distribute(a, max_clauses)?;
            let right = distribute(b, max_clauses)?;
            if left.len() + right.len() > max_clauses {
                return Err(ClausifyOverflow);
            }
            left.extend(right);
            Ok(left)
        }
        Nnf::Or(a, b) => {
            let left = distribute(a, max_clauses)?;
            let right = distribute(b, max_clauses)?;
            if left.len().saturating_mul(right.len()) > max_clauses {
                return Err(ClausifyOverflow);
            }
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    let mut clause = l.clone();
                    clause.extend(r.iter().cloned());
                    out.push(clause);
                }
            }
            Ok(out)
        }
        Nnf::ForAll(_, body) | Nnf::Exists(_, body) => distribute(body, max_clauses),
    }
}
