use std::fmt;

pub type SymbolId = u32;

/// A function or constant symbol. Skolem symbols live in their own
/// namespace and can never collide with a name from the input.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Named(String),
    Skolem { index: u32, arity: usize },
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Named(name) => f.write_str(name),
            Symbol::Skolem { index, .. } => write!(f, "$sk{index}"),
        }
    }
}

/// Interned predicate and function symbols for one problem.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    functions: Vec<Symbol>,
    predicates: Vec<String>,
}

impl SymbolTable {
    pub fn function(&mut self, symbol: Symbol) -> SymbolId {
        if let Some(i) = self.functions.iter().position(|s| *s == symbol) {
            return i as SymbolId;
        }
        self.functions.push(symbol);
        (self.functions.len() - 1) as SymbolId
    }

    pub fn predicate(&mut self, name: &str) -> SymbolId {
        if let Some(i) = self.predicates.iter().position(|s| s == name) {
            return i as SymbolId;
        }
        self.predicates.push(name.to_string());
        (self.predicates.len() - 1) as SymbolId
    }

    pub fn function_symbol(&self, id: SymbolId) -> &Symbol {
        &self.functions[id as usize]
    }

    pub fn predicate_name(&self, id: SymbolId) -> &str {
        &self.predicates[id as usize]
    }

    pub fn skolem_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.functions
            .iter()
            .filter(|s| matches!(s, Symbol::Skolem { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CTerm {
    Var(u32),
    App(SymbolId, Vec<CTerm>),
}

impl CTerm {
    /// Constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            CTerm::Var(_) => 0,
            CTerm::App(_, args) => args.iter().map(|a| 1 + a.depth()).max().unwrap_or(0),
        }
    }

    pub fn weight(&self) -> usize {
        match self {
            CTerm::Var(_) => 1,
            CTerm::App(_, args) => 1 + args.iter().map(CTerm::weight).sum::<usize>(),
        }
    }

    pub(crate) fn max_var(&self) -> Option<u32> {
        match self {
            CTerm::Var(v) => Some(*v),
            CTerm::App(_, args) => args.iter().filter_map(CTerm::max_var).max(),
        }
    }

    pub(crate) fn shift(&self, offset: u32) -> CTerm {
        match self {
            CTerm::Var(v) => CTerm::Var(v + offset),
            CTerm::App(f, args) => CTerm::App(*f, args.iter().map(|a| a.shift(offset)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub predicate: SymbolId,
    pub args: Vec<CTerm>,
}

impl Literal {
    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.predicate == other.predicate && self.args == other.args
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(CTerm::depth).max().unwrap_or(0)
    }
}

/// A disjunction of literals; variables are implicitly universal and
/// numbered from 0 in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    /// Removes duplicate literals and renumbers variables. Returns `None` for
    /// tautologies.
    pub fn normalized(literals: Vec<Literal>) -> Option<Clause> {
        let mut kept: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if kept.iter().any(|k| k.is_complement_of(&lit)) {
                return None;
            }
            if !kept.contains(&lit) {
                kept.push(lit);
            }
        }
        let mut mapping: Vec<(u32, u32)> = Vec::new();
        let literals = kept
            .into_iter()
            .map(|lit| Literal {
                args: lit.args.iter().map(|a| renumber(a, &mut mapping)).collect(),
                ..lit
            })
            .collect();
        Some(Clause { literals })
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn weight(&self) -> usize {
        self.literals
            .iter()
            .map(|l| 1 + l.args.iter().map(CTerm::weight).sum::<usize>())
            .sum()
    }

    pub fn depth(&self) -> usize {
        self.literals.iter().map(Literal::depth).max().unwrap_or(0)
    }

    pub(crate) fn var_count(&self) -> u32 {
        self.literals
            .iter()
            .flat_map(|l| l.args.iter())
            .filter_map(CTerm::max_var)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn display<'a>(&'a self, symbols: &'a SymbolTable) -> ClauseDisplay<'a> {
        ClauseDisplay {
            clause: self,
            symbols,
        }
    }
}

fn renumber(term: &CTerm, mapping: &mut Vec<(u32, u32)>) -> CTerm {
    match term {
        CTerm::Var(v) => {
            if let Some((_, new)) = mapping.iter().find(|(old, _)| old == v) {
                CTerm::Var(*new)
            } else {
                let new = mapping.len() as u32;
                mapping.push((*v, new));
                CTerm::Var(new)
            }
        }
        CTerm::App(f, args) => CTerm::App(*f, args.iter().map(|a| renumber(a, mapping)).collect()),
    }
}

pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    symbols: &'a SymbolTable,
}

impl ClauseDisplay<'_> {
    fn term(&self, t: &CTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            CTerm::Var(v) => write!(f, "_{v}"),
            CTerm::App(sym, args) => {
                write!(f, "{}", self.symbols.function_symbol(*sym))?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        self.term(a, f)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, lit) in self.clause.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if !lit.positive {
                f.write_str("-")?;
            }
            f.write_str(self.symbols.predicate_name(lit.predicate))?;
            f.write_str("(")?;
            for (j, a) in lit.args.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                self.term(a, f)?;
            }
            f.write_str(")")?;
        }
        f.write_str("}")
    }
}
