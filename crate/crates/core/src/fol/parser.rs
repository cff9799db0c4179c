//! Recursive-descent parser for the formula dialect.
//!
//! Precedence, tightest first: `-`, `&`, `|`, `->` (right associative),
//! `<->` (right associative). A quantifier body extends as far to the right
//! as possible: to the closing parenthesis of the enclosing group, or to the
//! end of the input.

use super::ast::{Formula, Term};
use super::error::{SyntaxError, SyntaxErrorClass};
use super::lexer::{tokenize, Spanned, Tok};

const MAX_NESTING: usize = 256;

/// Parses one closed sentence.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        bound: Vec::new(),
        first_free: None,
        depth: 0,
    };
    let formula = parser.formula()?;
    let trailing = parser.peek();
    if trailing.tok != Tok::Eof {
        return Err(unexpected(trailing, "end of input"));
    }
    if let Some((name, pos)) = parser.first_free {
        return Err(SyntaxError::new(
            SyntaxErrorClass::UnboundVariable,
            pos,
            format!("variable `{name}` is not bound by any quantifier"),
        ));
    }
    Ok(formula)
}

/// Unbound identifiers of this shape are read as free variables rather than
/// constants: a single letter `u`..`z`, optionally followed by digits.
pub fn looks_like_variable(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('u'..='z')) && chars.all(|c| c.is_ascii_digit())
}

struct Parser {
    tokens: Vec<Spanned>,
    index: usize,
    bound: Vec<String>,
    first_free: Option<(String, usize)>,
    depth: usize,
}

fn unexpected(found: &Spanned, expected: &str) -> SyntaxError {
    SyntaxError::new(
        SyntaxErrorClass::UnexpectedToken,
        found.pos,
        format!("expected {expected}, found {}", found.tok.describe()),
    )
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.index]
    }

    fn bump(&mut self) -> Spanned {
        let tok = self.tokens[self.index].clone();
        if tok.tok != Tok::Eof {
            self.index += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned, SyntaxError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(unexpected(self.peek(), &tok.describe()))
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(SyntaxError::new(
                SyntaxErrorClass::UnexpectedToken,
                self.peek().pos,
                "formula nested too deeply",
            ));
        }
        Ok(())
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        self.enter()?;
        let result = self.iff();
        self.depth -= 1;
        result
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.implication()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.formula()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            self.enter()?;
            let rhs = self.implication();
            self.depth -= 1;
            return Ok(Formula::implies(lhs, rhs?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        self.enter()?;
        let result = match self.peek().tok {
            Tok::Not => {
                self.bump();
                self.unary().map(Formula::not)
            }
            Tok::All | Tok::Exists => self.quantified(),
            _ => self.primary(),
        };
        self.depth -= 1;
        result
    }

    fn quantified(&mut self) -> Result<Formula, SyntaxError> {
        let universal = self.bump().tok == Tok::All;
        let mut vars = Vec::new();
        loop {
            let tok = self.peek().clone();
            match tok.tok {
                Tok::Ident(name) => {
                    self.bump();
                    vars.push(name);
                }
                Tok::Dot if !vars.is_empty() => {
                    self.bump();
                    break;
                }
                _ => {
                    let expected = if vars.is_empty() {
                        "a variable"
                    } else {
                        "a variable or `.`"
                    };
                    return Err(unexpected(&tok, expected));
                }
            }
        }
        let depth = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.formula();
        self.bound.truncate(depth);
        let mut body = body?;
        for var in vars.into_iter().rev() {
            body = if universal {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            };
        }
        Ok(body)
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok != Tok::LParen {
                    return Err(unexpected(self.peek(), "`(` after predicate name"));
                }
                self.bump();
                if self.peek().tok == Tok::RParen {
                    return Err(SyntaxError::new(
                        SyntaxErrorClass::EmptyPredicate,
                        tok.pos,
                        format!("predicate `{name}` has no arguments"),
                    ));
                }
                let mut args = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Formula::pred(name, args))
            }
            _ => Err(unexpected(&tok, "a formula")),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let tok = self.peek().clone();
        let Tok::Ident(name) = tok.tok else {
            return Err(unexpected(&tok, "a term"));
        };
        self.bump();
        if self.peek().tok == Tok::LParen {
            return Err(unexpected(self.peek(), "`,` or `)` (function symbols are not supported)"));
        }
        if self.bound.contains(&name) {
            return Ok(Term::Variable(name));
        }
        if looks_like_variable(&name) {
            if self.first_free.is_none() {
                self.first_free = Some((name.clone(), tok.pos));
            }
            return Ok(Term::Variable(name));
        }
        Ok(Term::Constant(name))
    }
}
