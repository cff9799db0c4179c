#![allow(dead_code)]

use folharness::fol::{Formula, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORKSHEET_PREMISES: [&str; 6] = [
    "all x. (Dispensable(x) -> EnvironmentFriendly(x))",
    "all x. (Woodware(x) -> Dispensable(x))",
    "all x. (Paper(x) -> Woodware(x))",
    "all x. (Good(x) -> -Bad(x))",
    "all x. (EnvironmentFriendly(x) -> Good(x))",
    "((Paper(Worksheet) & -EnvironmentFriendly(Worksheet)) | (-Paper(Worksheet) & EnvironmentFriendly(Worksheet)))",
];
pub const WORKSHEET_CONCLUSION: &str = "-Dispensable(Worksheet)";

/// One random entailment problem.
#[derive(Clone, Debug)]
pub struct Instance {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

pub struct InstanceGen {
    predicates: Vec<(String, usize)>,
    constants: Vec<String>,
    max_quantifier_depth: usize,
}

const VARS: [&str; 2] = ["x", "y"];

impl InstanceGen {
    /// Up to 3 predicates of arity <= 2 and up to 2 constants.
    pub fn random<R: Rng>(rng: &mut R, max_quantifier_depth: usize) -> Self {
        let names = ["P", "Q", "R"];
        let n_preds = rng.gen_range(1..=3);
        let predicates = names[..n_preds]
            .iter()
            .map(|n| (n.to_string(), rng.gen_range(1..=2)))
            .collect();
        let n_consts = rng.gen_range(0..=2);
        let constants = ["a", "b"][..n_consts].iter().map(|c| c.to_string()).collect();
        InstanceGen {
            predicates,
            constants,
            max_quantifier_depth,
        }
    }

    pub fn instance<R: Rng>(&self, rng: &mut R) -> Instance {
        let n_premises = rng.gen_range(1..=3);
        let premises = (0..n_premises).map(|_| self.formula(rng, 3, &mut Vec::new())).collect();
        Instance {
            premises,
            conclusion: self.formula(rng, 2, &mut Vec::new()),
        }
    }

    fn term<R: Rng>(&self, rng: &mut R, scope: &[String]) -> Option<Term> {
        let mut options: Vec<Term> = scope.iter().map(|v| Term::variable(v.clone())).collect();
        options.extend(self.constants.iter().map(|c| Term::constant(c.clone())));
        options.choose(rng).cloned()
    }

    fn atom<R: Rng>(&self, rng: &mut R, scope: &mut Vec<String>) -> Formula {
        let (name, arity) = self.predicates.choose(rng).unwrap().clone();
        let args: Option<Vec<Term>> = (0..arity).map(|_| self.term(rng, scope)).collect();
        match args {
            Some(args) => Formula::pred(name, args),
            // no constants and nothing bound: quantify instead
            None => {
                let v = VARS[scope.len() % VARS.len()].to_string();
                scope.push(v.clone());
                let args = (0..arity).map(|_| Term::variable(v.clone())).collect();
                scope.pop();
                if rng.gen_bool(0.5) {
                    Formula::forall(v, Formula::pred(name, args))
                } else {
                    Formula::exists(v, Formula::pred(name, args))
                }
            }
        }
    }

    fn formula<R: Rng>(&self, rng: &mut R, size: usize, scope: &mut Vec<String>) -> Formula {
        let quantifiable = scope.len() < self.max_quantifier_depth;
        let roll = rng.gen_range(0..10);
        if size == 0 || roll < 2 {
            return self.atom(rng, scope);
        }
        match roll {
            2 | 3 if quantifiable => {
                let v = VARS[scope.len()].to_string();
                scope.push(v.clone());
                let body = self.formula(rng, size, scope);
                scope.pop();
                if roll == 2 {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
            4 => Formula::not(self.formula(rng, size - 1, scope)),
            5 => Formula::and(self.formula(rng, size - 1, scope), self.formula(rng, size - 1, scope)),
            6 => Formula::or(self.formula(rng, size - 1, scope), self.formula(rng, size - 1, scope)),
            7 | 8 => Formula::implies(
                self.formula(rng, size - 1, scope),
                self.formula(rng, size - 1, scope),
            ),
            9 => Formula::iff(self.formula(rng, size - 1, scope), self.formula(rng, size - 1, scope)),
            _ => self.atom(rng, scope),
        }
    }
}

/// Existential quantifiers of `f` under the given polarity, after pushing
/// negations inward, or `None` when some existential sits inside the scope
/// of a universal.
fn existentials(f: &Formula, positive: bool, under_universal: bool) -> Option<usize> {
    match f {
        Formula::Pred { .. } => Some(0),
        Formula::Not(a) => existentials(a, !positive, under_universal),
        Formula::And(a, b) | Formula::Or(a, b) => {
            Some(existentials(a, positive, under_universal)? + existentials(b, positive, under_universal)?)
        }
        Formula::Implies(a, b) => {
            Some(existentials(a, !positive, under_universal)? + existentials(b, positive, under_universal)?)
        }
        Formula::Iff(a, b) => Some(
            existentials(a, true, under_universal)?
                + existentials(a, false, under_universal)?
                + existentials(b, true, under_universal)?
                + existentials(b, false, under_universal)?,
        ),
        Formula::ForAll(_, body) | Formula::Exists(_, body) => {
            let universal = matches!(f, Formula::ForAll(..)) == positive;
            if universal {
                existentials(body, positive, true)
            } else if under_universal {
                None
            } else {
                Some(1 + existentials(body, positive, false)?)
            }
        }
    }
}

/// Whether satisfiability of `premises` plus `extra` (with the given
/// polarity) is decided by models of at most `max_domain` elements.
///
/// Sentences whose negation normal form has no existential inside a
/// universal have a model of size at most max(1, constants + existentials)
/// whenever they have any model, because the substructure generated by the
/// constants and witnesses preserves universal statements.
fn small_model_side(instance: &Instance, conclusion_positive: bool, max_domain: usize) -> bool {
    let mut witnesses = 0;
    for p in &instance.premises {
        match existentials(p, true, false) {
            Some(n) => witnesses += n,
            None => return false,
        }
    }
    match existentials(&instance.conclusion, conclusion_positive, false) {
        Some(n) => witnesses += n,
        None => return false,
    }
    let mut constants: Vec<String> = Vec::new();
    for f in instance.premises.iter().chain(std::iter::once(&instance.conclusion)) {
        for c in f.constants() {
            if !constants.contains(&c) {
                constants.push(c);
            }
        }
    }
    (constants.len() + witnesses).max(1) <= max_domain
}

/// Both refutation problems the classifier poses are covered by the small
/// model bound, so a finite search over `1..=max_domain` is exhaustive.
pub fn oracle_is_complete_for(instance: &Instance, max_domain: usize) -> bool {
    small_model_side(instance, true, max_domain) && small_model_side(instance, false, max_domain)
}

const FUZZ_CONSTANTS: [&str; 4] = ["a", "b", "Worksheet", "john"];
const FUZZ_VARIABLES: [&str; 4] = ["x", "y", "z", "w"];
const FUZZ_PREDICATES: [&str; 4] = ["P", "Q", "Likes", "EnvironmentFriendly"];

/// A closed formula of depth at most `depth`, covering every connective
/// and both quantifiers. Variables may shadow outer bindings.
pub fn fuzz_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    fuzz_inner(rng, depth, &mut Vec::new())
}

fn fuzz_inner<R: Rng>(rng: &mut R, depth: usize, scope: &mut Vec<&'static str>) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        let name = *FUZZ_PREDICATES.choose(rng).unwrap();
        let arity = rng.gen_range(1..=3);
        let args = (0..arity)
            .map(|_| {
                if !scope.is_empty() && rng.gen_bool(0.6) {
                    Term::variable(*scope.choose(rng).unwrap())
                } else {
                    Term::constant(*FUZZ_CONSTANTS.choose(rng).unwrap())
                }
            })
            .collect();
        return Formula::pred(name, args);
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Formula::not(fuzz_inner(rng, d, scope)),
        1 => Formula::and(fuzz_inner(rng, d, scope), fuzz_inner(rng, d, scope)),
        2 => Formula::or(fuzz_inner(rng, d, scope), fuzz_inner(rng, d, scope)),
        3 => Formula::implies(fuzz_inner(rng, d, scope), fuzz_inner(rng, d, scope)),
        4 => Formula::iff(fuzz_inner(rng, d, scope), fuzz_inner(rng, d, scope)),
        k => {
            let v = *FUZZ_VARIABLES.choose(rng).unwrap();
            scope.push(v);
            let body = fuzz_inner(rng, d, scope);
            scope.pop();
            if k % 2 == 0 {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

/// Formula depth counting every node.
pub fn depth(f: &Formula) -> usize {
    match f {
        Formula::Pred { .. } => 1,
        Formula::Not(a) | Formula::ForAll(_, a) | Formula::Exists(_, a) => 1 + depth(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            1 + depth(a).max(depth(b))
        }
    }
}

pub fn asset(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(rel)
}

/// What each fixture generation was written to produce, per mode: the
/// voted label of s1..s5 (None when every sample failed), accuracy, and
/// error counts in the arity / unexpected token / other buckets.
pub struct Planned {
    pub mode: &'static str,
    pub labels: [Option<&'static str>; 5],
    pub accuracy: f64,
    pub buckets: [usize; 3],
    pub ties: &'static [&'static str],
    pub confusion: [[usize; 4]; 3],
}

pub const SAMPLE_PLAN: [Planned; 5] = [
    Planned {
        mode: "Naive",
        labels: [Some("True"), Some("False"), Some("True"), Some("True"), Some("False")],
        accuracy: 80.0,
        buckets: [0, 0, 3],
        ties: &["s5"],
        confusion: [[2, 0, 0, 0], [0, 2, 0, 0], [1, 0, 0, 0]],
    },
    Planned {
        mode: "ScratchPad",
        labels: [Some("True"), Some("False"), Some("True"), Some("True"), Some("Uncertain")],
        accuracy: 60.0,
        buckets: [0, 0, 0],
        ties: &["s5"],
        confusion: [[2, 0, 0, 0], [0, 1, 1, 0], [1, 0, 0, 0]],
    },
    Planned {
        mode: "CoT",
        labels: [Some("True"), Some("False"), Some("Uncertain"), Some("True"), Some("False")],
        accuracy: 100.0,
        buckets: [0, 0, 2],
        ties: &["s3"],
        confusion: [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0]],
    },
    Planned {
        mode: "LINC",
        labels: [Some("True"), Some("False"), Some("True"), None, Some("False")],
        accuracy: 60.0,
        buckets: [8, 8, 7],
        ties: &[],
        confusion: [[1, 0, 0, 1], [0, 2, 0, 0], [1, 0, 0, 0]],
    },
    Planned {
        mode: "NSCoT",
        labels: [Some("True"), Some("False"), Some("Uncertain"), Some("True"), Some("False")],
        accuracy: 100.0,
        buckets: [4, 6, 4],
        ties: &["s3"],
        confusion: [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0]],
    },
];
