use std::collections::BTreeSet;
use std::fmt;

/// An argument of a predicate application.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Constant(name) | Term::Variable(name) => name,
        }
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }
}

/// A first-order sentence without function symbols or equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Pred { name: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred {
            name: name.into(),
            args,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Variables occurring in predicate arguments that no enclosing
    /// quantifier binds.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut free = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut free);
        free
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Pred { .. } => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::ForAll(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Constant names in first-occurrence order.
    pub fn constants(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_preds(&mut |_, args| {
            for arg in args {
                if let Term::Constant(c) = arg {
                    if !out.contains(c) {
                        out.push(c.clone());
                    }
                }
            }
        });
        out
    }

    /// Calls `f` on every predicate application, left to right.
    pub fn visit_preds<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [Term])) {
        match self {
            Formula::Pred { name, args } => f(name, args),
            Formula::Not(inner) | Formula::ForAll(_, inner) | Formula::Exists(_, inner) => {
                inner.visit_preds(f)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_preds(f);
                b.visit_preds(f);
            }
        }
    }

    /// Canonical, fully parenthesized text that parses back to `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_into(self, &mut out, false);
        out
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, free: &mut BTreeSet<String>) {
    match f {
        Formula::Pred { args, .. } => {
            for arg in args {
                if let Term::Variable(v) = arg {
                    if !bound.iter().any(|b| b == v) {
                        free.insert(v.clone());
                    }
                }
            }
        }
        Formula::Not(inner) => collect_free(inner, bound, free),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, free);
            collect_free(b, bound, free);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            bound.push(v.clone());
            collect_free(body, bound, free);
            bound.pop();
        }
    }
}

// `nested` is set when the formula is an operand of a connective; a bare
// quantifier there would swallow everything to its right on re-parse.
fn render_into(f: &Formula, out: &mut String, nested: bool) {
    match f {
        Formula::Pred { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(arg.name());
            }
            out.push(')');
        }
        Formula::Not(inner) => {
            out.push('-');
            render_into(inner, out, true);
        }
        Formula::And(a, b) => render_binary(a, "&", b, out),
        Formula::Or(a, b) => render_binary(a, "|", b, out),
        Formula::Implies(a, b) => render_binary(a, "->", b, out),
        Formula::Iff(a, b) => render_binary(a, "<->", b, out),
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            let keyword = if matches!(f, Formula::ForAll(..)) {
                "all"
            } else {
                "exists"
            };
            if nested {
                out.push('(');
            }
            out.push_str(keyword);
            out.push(' ');
            out.push_str(v);
            out.push_str(". ");
            render_into(body, out, false);
            if nested {
                out.push(')');
            }
        }
    }
}

fn render_binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    out.push('(');
    render_into(a, out, true);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    render_into(b, out, true);
    out.push(')');
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
