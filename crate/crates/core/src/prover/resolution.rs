//! Given-clause saturation with binary resolution, factoring, unit
//! preference and subsumption.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::clause::{CTerm, Clause, Literal};

/// Bounds on one proof attempt. All fields must be positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceLimits {
    pub max_clauses: usize,
    pub max_seconds: f64,
    pub max_literal_depth: usize,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits {
            max_clauses: 50_000,
            max_seconds: 10.0,
            max_literal_depth: 12,
        }
    }
}

impl ResourceLimits {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_clauses == 0 {
            return Err("max_clauses must be positive".into());
        }
        if !(self.max_seconds > 0.0) {
            return Err("max_seconds must be positive".into());
        }
        if self.max_literal_depth == 0 {
            return Err("max_literal_depth must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofStatus {
    /// The empty clause was derived.
    Proved,
    /// Every inference was made without deriving the empty clause and
    /// nothing was discarded for resource reasons.
    Saturated,
    ResourceOut,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofResult {
    pub status: ProofStatus,
    pub clauses_generated: usize,
    pub elapsed: f64,
}

/// Searches for a refutation of `clauses`.
pub fn refute(clauses: &[Clause], limits: &ResourceLimits) -> ProofResult {
    let start = Instant::now();
    let mut search = Search {
        store: Vec::new(),
        active: Vec::new(),
        passive: BinaryHeap::new(),
        generated: 0,
        incomplete: false,
        limits,
        start,
    };
    let status = search.run(clauses);
    ProofResult {
        status,
        clauses_generated: search.generated,
        elapsed: start.elapsed().as_secs_f64(),
    }
}

struct Entry {
    clause: Clause,
    mask: u64,
    deleted: bool,
}

struct Search<'a> {
    store: Vec<Entry>,
    active: Vec<usize>,
    passive: BinaryHeap<Reverse<(usize, usize, usize)>>,
    generated: usize,
    incomplete: bool,
    limits: &'a ResourceLimits,
    start: Instant,
}

enum Stop {
    Proved,
    ResourceOut,
}

impl Search<'_> {
    fn run(&mut self, input: &[Clause]) -> ProofStatus {
        match self.saturate(input) {
            Ok(()) if self.incomplete => ProofStatus::ResourceOut,
            Ok(()) => ProofStatus::Saturated,
            Err(Stop::Proved) => ProofStatus::Proved,
            Err(Stop::ResourceOut) => ProofStatus::ResourceOut,
        }
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed().as_secs_f64() > self.limits.max_seconds
    }

    fn saturate(&mut self, input: &[Clause]) -> Result<(), Stop> {
        for clause in input {
            self.add(clause.literals.clone())?;
        }
        while let Some(Reverse((_, _, id))) = self.passive.pop() {
            if self.store[id].deleted {
                continue;
            }
            if self.out_of_time() {
                return Err(Stop::ResourceOut);
            }
            let given = self.store[id].clause.clone();
            for factor in factors(&given) {
                self.add(factor)?;
            }
            if self.store[id].deleted {
                continue;
            }
            self.active.push(id);
            let partners: Vec<usize> = self.active.clone();
            for other in partners {
                if self.store[other].deleted {
                    continue;
                }
                let partner = self.store[other].clause.clone();
                for resolvent in resolvents(&given, &partner) {
                    self.add(resolvent)?;
                }
                if self.store[id].deleted {
                    break;
                }
            }
        }
        Ok(())
    }

    fn add(&mut self, literals: Vec<Literal>) -> Result<(), Stop> {
        self.generated += 1;
        if self.generated > self.limits.max_clauses {
            return Err(Stop::ResourceOut);
        }
        if self.generated % 256 == 0 && self.out_of_time() {
            return Err(Stop::ResourceOut);
        }
        let Some(clause) = Clause::normalized(literals) else {
            return Ok(());
        };
        if clause.is_empty() {
            return Err(Stop::Proved);
        }
        if clause.depth() > self.limits.max_literal_depth {
            self.incomplete = true;
            return Ok(());
        }
        let mask = literal_mask(&clause);
        let subsumed = self.store.iter().any(|e| {
            !e.deleted && e.mask & !mask == 0 && e.clause.len() <= clause.len() && subsumes(&e.clause, &clause)
        });
        if subsumed {
            return Ok(());
        }
        for e in self.store.iter_mut() {
            if !e.deleted && mask & !e.mask == 0 && clause.len() <= e.clause.len() && subsumes(&clause, &e.clause) {
                e.deleted = true;
            }
        }
        let id = self.store.len();
        self.passive.push(Reverse((clause.len(), clause.weight(), id)));
        self.store.push(Entry {
            clause,
            mask,
            deleted: false,
        });
        Ok(())
    }
}

fn literal_mask(clause: &Clause) -> u64 {
    clause
        .literals
        .iter()
        .fold(0, |m, l| m | 1 << ((l.predicate as u64 * 2 + l.positive as u64) % 64))
}

type Subst = Vec<Option<CTerm>>;

fn resolve_var<'a>(mut t: &'a CTerm, s: &'a Subst) -> &'a CTerm {
    while let CTerm::Var(v) = t {
        match s.get(*v as usize).and_then(Option::as_ref) {
            Some(bound) => t = bound,
            None => break,
        }
    }
    t
}

fn occurs(v: u32, t: &CTerm, s: &Subst) -> bool {
    match resolve_var(t, s) {
        CTerm::Var(w) => *w == v,
        CTerm::App(_, args) => args.iter().any(|a| occurs(v, a, s)),
    }
}

fn unify(a: &CTerm, b: &CTerm, s: &mut Subst) -> bool {
    let a = resolve_var(a, s).clone();
    let b = resolve_var(b, s).clone();
    match (&a, &b) {
        (CTerm::Var(x), CTerm::Var(y)) if x == y => true,
        (CTerm::Var(x), t) | (t, CTerm::Var(x)) => {
            if occurs(*x, t, s) {
                return false;
            }
            s[*x as usize] = Some(t.clone());
            true
        }
        (CTerm::App(f, fa), CTerm::App(g, ga)) => {
            f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| unify(x, y, s))
        }
    }
}

fn unify_args(a: &[CTerm], b: &[CTerm], s: &mut Subst) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| unify(x, y, s))
}

fn apply(t: &CTerm, s: &Subst) -> CTerm {
    match resolve_var(t, s) {
        CTerm::Var(v) => CTerm::Var(*v),
        CTerm::App(f, args) => CTerm::App(*f, args.iter().map(|a| apply(a, s)).collect()),
    }
}

fn apply_lit(l: &Literal, s: &Subst) -> Literal {
    Literal {
        positive: l.positive,
        predicate: l.predicate,
        args: l.args.iter().map(|a| apply(a, s)).collect(),
    }
}

fn shift_lit(l: &Literal, offset: u32) -> Literal {
    Literal {
        positive: l.positive,
        predicate: l.predicate,
        args: l.args.iter().map(|a| a.shift(offset)).collect(),
    }
}

/// All binary resolvents of `a` and `b`, with `b` renamed apart.
pub(crate) fn resolvents(a: &Clause, b: &Clause) -> Vec<Vec<Literal>> {
    let offset = a.var_count();
    let b_lits: Vec<Literal> = b.literals.iter().map(|l| shift_lit(l, offset)).collect();
    let vars = (offset + b.var_count()) as usize;
    let mut out = Vec::new();
    for (i, la) in a.literals.iter().enumerate() {
        for (j, lb) in b_lits.iter().enumerate() {
            if la.positive == lb.positive || la.predicate != lb.predicate {
                continue;
            }
            let mut s: Subst = vec![None; vars];
            if !unify_args(&la.args, &lb.args, &mut s) {
                continue;
            }
            let lits = a
                .literals
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, l)| apply_lit(l, &s))
                .chain(
                    b_lits
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, l)| apply_lit(l, &s)),
                )
                .collect();
            out.push(lits);
        }
    }
    out
}

/// Binary factors of `c`.
pub(crate) fn factors(c: &Clause) -> Vec<Vec<Literal>> {
    let vars = c.var_count() as usize;
    let mut out = Vec::new();
    for i in 0..c.literals.len() {
        for j in i + 1..c.literals.len() {
            let (li, lj) = (&c.literals[i], &c.literals[j]);
            if li.positive != lj.positive || li.predicate != lj.predicate {
                continue;
            }
            let mut s: Subst = vec![None; vars];
            if unify_args(&li.args, &lj.args, &mut s) {
                out.push(
                    c.literals
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, l)| apply_lit(l, &s))
                        .collect(),
                );
            }
        }
    }
    out
}

// One-way matching: only pattern variables bind; target variables are rigid.
fn match_term(pattern: &CTerm, target: &CTerm, s: &mut Subst) -> bool {
    match pattern {
        CTerm::Var(v) => match &s[*v as usize] {
            Some(bound) => bound == target,
            None => {
                s[*v as usize] = Some(target.clone());
                true
            }
        },
        CTerm::App(f, pa) => match target {
            CTerm::App(g, ta) => {
                f == g && pa.len() == ta.len() && pa.iter().zip(ta).all(|(p, t)| match_term(p, t, s))
            }
            CTerm::Var(_) => false,
        },
    }
}

/// Whether some instance of `c` is a sub-multiset of `d`.
pub(crate) fn subsumes(c: &Clause, d: &Clause) -> bool {
    if c.len() > d.len() {
        return false;
    }
    let mut s: Subst = vec![None; c.var_count() as usize];
    subsume_from(&c.literals, d, &mut s)
}

fn subsume_from(rest: &[Literal], d: &Clause, s: &mut Subst) -> bool {
    let Some((first, tail)) = rest.split_first() else {
        return true;
    };
    for target in &d.literals {
        if target.positive != first.positive || target.predicate != first.predicate {
            continue;
        }
        let mut trial = s.clone();
        if first.args.len() == target.args.len()
            && first
                .args
                .iter()
                .zip(&target.args)
                .all(|(p, t)| match_term(p, t, &mut trial))
            && subsume_from(tail, d, &mut trial)
        {
            *s = trial;
            return true;
        }
    }
    false
}
