//! Terms, formulas and derivations for the set-theoretic language and the
//! general first-order QN4 language.
//!
//! Surface syntax:
//!
//! ```text
//! formula := formula <-> formula | formula -> formula | formula | formula
//!          | formula & formula | ~formula | forall x . formula
//!          | exists x . formula | forall x in t . formula | exists x in t . formula
//!          | bot | t in t | t eq t | P(t, ...) | p | ( formula )
//! term    := x | #<id> | f(t, ...)
//! ```
//!
//! Precedence from tightest: `~`, `&`, `|`, `->` (right associative), `<->`.
//! Quantifier bodies extend as far right as possible. `a <-> b` and the
//! bounded quantifiers are sugar and never appear in the AST.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::files::FileError;
use crate::universe::NameId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Name(NameId),
    App(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Mem(Term, Term),
    Eq(Term, Term),
    Pred(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bot,
    Atom(Atom),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` used with {found} arguments, declared with {declared}")]
    ArityMismatch {
        symbol: String,
        declared: usize,
        found: usize,
    },
    #[error("{term} is not free for {var} in {formula}")]
    NotFreeFor {
        var: String,
        term: String,
        formula: String,
    },
    #[error("negation over a quantifier: {0}")]
    NegOverQuantifier(String),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Name(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Name(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    fn replace(&self, x: &str, t: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace(x, t)).collect()),
            other => other.clone(),
        }
    }
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Mem(a, b) | Atom::Eq(a, b) => vec![a, b],
            Atom::Pred(_, args) => args.iter().collect(),
        }
    }

    fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Mem(a, b) => Atom::Mem(f(a), f(b)),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Pred(p, args) => Atom::Pred(p.clone(), args.iter().map(f).collect()),
        }
    }
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }
    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }
    /// `a <-> b`, i.e. `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }
    pub fn forall(x: &str, body: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(body))
    }
    pub fn exists(x: &str, body: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(body))
    }
    pub fn mem(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Mem(a, b))
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }
    pub fn pred(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Pred(p.to_string(), args))
    }
    /// `forall x . x in t -> body`
    pub fn forall_in(x: &str, t: Term, body: Formula) -> Formula {
        Formula::forall(x, Formula::imp(Formula::mem(Term::var(x), t), body))
    }
    /// `exists x . x in t & body`
    pub fn exists_in(x: &str, t: Term, body: Formula) -> Formula {
        Formula::exists(x, Formula::and(Formula::mem(Term::var(x), t), body))
    }

    /// Parses with a fresh permissive signature.
    pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
        parse_formula(text, &mut Signature::permissive())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bot => {}
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                a.terms().iter().for_each(|t| t.vars(&mut vs));
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Neg(a) => a.collect_free(bound, out),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Formula::Bot => false,
            Formula::Atom(a) => a.terms().iter().any(|t| t.contains_var(x)),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.is_free(x) || b.is_free(x),
            Formula::Neg(a) => a.is_free(x),
            Formula::Forall(y, a) | Formula::Exists(y, a) => y != x && a.is_free(x),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn has_negation(&self) -> bool {
        match self {
            Formula::Bot | Formula::Atom(_) => false,
            Formula::Neg(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.has_negation() || b.has_negation(),
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.has_negation(),
        }
    }

    /// Matches `forall x . x in t -> body` with `x` not occurring in `t`.
    pub fn as_bounded_forall(&self) -> Option<(&str, &Term, &Formula)> {
        if let Formula::Forall(x, body) = self {
            if let Formula::Imp(guard, rest) = body.as_ref() {
                if let Formula::Atom(Atom::Mem(Term::Var(y), t)) = guard.as_ref() {
                    if y == x && !t.contains_var(x) {
                        return Some((x, t, rest));
                    }
                }
            }
        }
        None
    }

    /// Matches `exists x . x in t & body` with `x` not occurring in `t`.
    pub fn as_bounded_exists(&self) -> Option<(&str, &Term, &Formula)> {
        if let Formula::Exists(x, body) = self {
            if let Formula::And(guard, rest) = body.as_ref() {
                if let Formula::Atom(Atom::Mem(Term::Var(y), t)) = guard.as_ref() {
                    if y == x && !t.contains_var(x) {
                        return Some((x, t, rest));
                    }
                }
            }
        }
        None
    }

    /// Every quantifier is bounded.
    pub fn is_restricted(&self) -> bool {
        match self {
            Formula::Bot | Formula::Atom(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.is_restricted() && b.is_restricted(),
            Formula::Neg(a) => a.is_restricted(),
            Formula::Forall(..) => self.as_bounded_forall().is_some_and(|(_, _, b)| b.is_restricted()),
            Formula::Exists(..) => self.as_bounded_exists().is_some_and(|(_, _, b)| b.is_restricted()),
        }
    }

    /// Replaces every free occurrence of `x` by the name `id`. Names are
    /// closed, so this never captures.
    pub fn instantiate(&self, x: &str, id: NameId) -> Formula {
        self.replace_free(x, &Term::Name(id))
    }

    fn replace_free(&self, x: &str, t: &Term) -> Formula {
        match self {
            Formula::Bot => Formula::Bot,
            Formula::Atom(a) => Formula::Atom(a.map_terms(&|s| s.replace(x, t))),
            Formula::And(a, b) => Formula::and(a.replace_free(x, t), b.replace_free(x, t)),
            Formula::Or(a, b) => Formula::or(a.replace_free(x, t), b.replace_free(x, t)),
            Formula::Imp(a, b) => Formula::imp(a.replace_free(x, t), b.replace_free(x, t)),
            Formula::Neg(a) => Formula::neg(a.replace_free(x, t)),
            Formula::Forall(y, _) | Formula::Exists(y, _) if y == x => self.clone(),
            Formula::Forall(y, a) => Formula::forall(y, a.replace_free(x, t)),
            Formula::Exists(y, a) => Formula::exists(y, a.replace_free(x, t)),
        }
    }

    /// Name constants occurring anywhere in the formula.
    pub fn names(&self) -> BTreeSet<NameId> {
        fn term(t: &Term, out: &mut BTreeSet<NameId>) {
            match t {
                Term::Name(id) => {
                    out.insert(*id);
                }
                Term::Var(_) => {}
                Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            }
        }
        fn go(f: &Formula, out: &mut BTreeSet<NameId>) {
            match f {
                Formula::Bot => {}
                Formula::Atom(a) => a.terms().into_iter().for_each(|t| term(t, out)),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                    go(a, out);
                    go(b, out)
                }
                Formula::Neg(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => go(a, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Renames every name constant through `f`.
    pub fn map_names(&self, f: &impl Fn(NameId) -> NameId) -> Formula {
        fn term(t: &Term, f: &impl Fn(NameId) -> NameId) -> Term {
            match t {
                Term::Name(id) => Term::Name(f(*id)),
                Term::Var(_) => t.clone(),
                Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| term(a, f)).collect()),
            }
        }
        match self {
            Formula::Bot => Formula::Bot,
            Formula::Atom(a) => Formula::Atom(a.map_terms(&|t| term(t, f))),
            Formula::And(a, b) => Formula::and(a.map_names(f), b.map_names(f)),
            Formula::Or(a, b) => Formula::or(a.map_names(f), b.map_names(f)),
            Formula::Imp(a, b) => Formula::imp(a.map_names(f), b.map_names(f)),
            Formula::Neg(a) => Formula::neg(a.map_names(f)),
            Formula::Forall(x, a) => Formula::forall(x, a.map_names(f)),
            Formula::Exists(x, a) => Formula::exists(x, a.map_names(f)),
        }
    }
}

/// No free occurrence of `x` in `phi` lies under a quantifier binding a
/// variable of `t`.
pub fn free_for(t: &Term, x: &str, phi: &Formula) -> bool {
    match phi {
        Formula::Bot | Formula::Atom(_) => true,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => free_for(t, x, a) && free_for(t, x, b),
        Formula::Neg(a) => free_for(t, x, a),
        Formula::Forall(y, a) | Formula::Exists(y, a) => {
            if !phi.is_free(x) {
                true
            } else {
                !t.contains_var(y) && free_for(t, x, a)
            }
        }
    }
}

/// `phi(x/t)`: simultaneous replacement of the free occurrences of `x`.
pub fn substitute(phi: &Formula, x: &str, t: &Term) -> Result<Formula, SyntaxError> {
    if !free_for(t, x, phi) {
        return Err(SyntaxError::NotFreeFor {
            var: x.to_string(),
            term: t.to_string(),
            formula: phi.to_string(),
        });
    }
    Ok(phi.replace_free(x, t))
}

/// Pushes strong negation down to atoms with the N4 equivalences.
pub fn nnf_n4(phi: &Formula) -> Result<Formula, SyntaxError> {
    Ok(match phi {
        Formula::Bot | Formula::Atom(_) => phi.clone(),
        Formula::And(a, b) => Formula::and(nnf_n4(a)?, nnf_n4(b)?),
        Formula::Or(a, b) => Formula::or(nnf_n4(a)?, nnf_n4(b)?),
        Formula::Imp(a, b) => Formula::imp(nnf_n4(a)?, nnf_n4(b)?),
        Formula::Forall(x, a) => Formula::forall(x, nnf_n4(a)?),
        Formula::Exists(x, a) => Formula::exists(x, nnf_n4(a)?),
        Formula::Neg(inner) => match inner.as_ref() {
            Formula::Bot | Formula::Atom(_) => phi.clone(),
            Formula::Neg(a) => nnf_n4(a)?,
            Formula::And(a, b) => Formula::or(nnf_n4(&Formula::neg((**a).clone()))?, nnf_n4(&Formula::neg((**b).clone()))?),
            Formula::Or(a, b) => Formula::and(nnf_n4(&Formula::neg((**a).clone()))?, nnf_n4(&Formula::neg((**b).clone()))?),
            Formula::Imp(a, b) => Formula::and(nnf_n4(a)?, nnf_n4(&Formula::neg((**b).clone()))?),
            Formula::Forall(..) | Formula::Exists(..) => {
                return Err(SyntaxError::NegOverQuantifier(phi.to_string()))
            }
        },
    })
}

/// Binds the free variables, outermost first in lexicographic order.
pub fn universal_closure(phi: &Formula) -> Formula {
    phi.free_vars()
        .into_iter()
        .rev()
        .fold(phi.clone(), |acc, x| Formula::forall(&x, acc))
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Name(id) => write!(f, "#{}", id.0),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Mem(a, b) => write!(f, "{a} in {b}"),
            Atom::Eq(a, b) => write!(f, "{a} eq {b}"),
            Atom::Pred(p, args) if args.is_empty() => write!(f, "{p}"),
            Atom::Pred(p, args) => write!(f, "{}", Term::App(p.clone(), args.clone())),
        }
    }
}

impl Formula {
    fn is_simple(&self) -> bool {
        matches!(self, Formula::Bot | Formula::Atom(_) | Formula::Neg(_))
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_simple() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula| {
            a.fmt_operand(f)?;
            write!(f, " {op} ")?;
            b.fmt_operand(f)
        };
        match self {
            Formula::Bot => write!(f, "bot"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) => binary(f, a, "&", b),
            Formula::Or(a, b) => binary(f, a, "|", b),
            Formula::Imp(a, b) => binary(f, a, "->", b),
            Formula::Neg(a) => {
                write!(f, "~")?;
                a.fmt_operand(f)
            }
            Formula::Forall(x, a) => write!(f, "forall {x} . {a}"),
            Formula::Exists(x, a) => write!(f, "exists {x} . {a}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Predicate and function symbols with their arities.
///
/// A permissive signature declares symbols at first use and only rejects
/// inconsistent arities; a strict one rejects undeclared symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
    pub permissive: bool,
}

impl Signature {
    /// The language of set theory: only `in` and `eq`.
    pub fn set_theory() -> Self {
        Signature::default()
    }

    pub fn permissive() -> Self {
        Signature {
            permissive: true,
            ..Signature::default()
        }
    }

    pub fn with_predicate(mut self, p: &str, arity: usize) -> Self {
        self.predicates.insert(p.to_string(), arity);
        self
    }

    pub fn with_function(mut self, g: &str, arity: usize) -> Self {
        self.functions.insert(g.to_string(), arity);
        self
    }

    fn check(&mut self, symbol: &str, arity: usize, predicate: bool) -> Result<(), SyntaxError> {
        let permissive = self.permissive;
        let table = if predicate { &mut self.predicates } else { &mut self.functions };
        match table.get(symbol) {
            Some(&declared) if declared != arity => Err(SyntaxError::ArityMismatch {
                symbol: symbol.to_string(),
                declared,
                found: arity,
            }),
            Some(_) => Ok(()),
            None if permissive => {
                table.insert(symbol.to_string(), arity);
                Ok(())
            }
            None => Err(SyntaxError::UnknownSymbol(symbol.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Name(u32),
    Tilde,
    Amp,
    Bar,
    Arrow,
    Iff,
    LParen,
    RParen,
    Comma,
    Dot,
}

const KEYWORDS: [&str; 5] = ["bot", "in", "eq", "forall", "exists"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position, expected: &str| SyntaxError::Syntax {
        position,
        expected: expected.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '~' => out.push((start, Tok::Tilde)),
            '&' => out.push((start, Tok::Amp)),
            '|' => out.push((start, Tok::Bar)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            ',' => out.push((start, Tok::Comma)),
            '.' => out.push((start, Tok::Dot)),
            '-' => {
                if bytes.get(i + 1) != Some(&b'>') {
                    return Err(err(start, "`->`"));
                }
                i += 1;
                out.push((start, Tok::Arrow));
            }
            '<' => {
                if text.get(i..i + 3) != Some("<->") {
                    return Err(err(start, "`<->`"));
                }
                i += 2;
                out.push((start, Tok::Iff));
            }
            '#' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let id = text[i + 1..j].parse().map_err(|_| err(start, "name id after `#`"))?;
                out.push((start, Tok::Name(id)));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'\'') {
                    j += 1;
                }
                out.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => return Err(err(start, "a formula")),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: &'a mut Signature,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError::Syntax {
            position: self.offset(),
            expected: expected.to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == k)
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let a = self.imp()?;
        if self.eat(&Tok::Iff) {
            let b = self.imp()?;
            return Ok(Formula::iff(a, b));
        }
        Ok(a)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let a = self.or()?;
        if self.eat(&Tok::Arrow) {
            let b = self.imp()?;
            return Ok(Formula::imp(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut a = self.and()?;
        while self.eat(&Tok::Bar) {
            a = Formula::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut a = self.unary()?;
        while self.eat(&Tok::Amp) {
            a = Formula::and(a, self.unary()?);
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::neg(self.unary()?));
        }
        if self.is_keyword("forall") || self.is_keyword("exists") {
            let universal = self.is_keyword("forall");
            self.pos += 1;
            let x = match self.peek() {
                Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => x.clone(),
                _ => return self.fail("a variable"),
            };
            self.pos += 1;
            let bound = if self.is_keyword("in") {
                self.pos += 1;
                Some(self.term()?)
            } else {
                None
            };
            if !self.eat(&Tok::Dot) {
                return self.fail("`.`");
            }
            let body = self.iff()?;
            return Ok(match (universal, bound) {
                (true, None) => Formula::forall(&x, body),
                (false, None) => Formula::exists(&x, body),
                (true, Some(t)) => Formula::forall_in(&x, t, body),
                (false, Some(t)) => Formula::exists_in(&x, t, body),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        if self.eat(&Tok::LParen) {
            let a = self.iff()?;
            if !self.eat(&Tok::RParen) {
                return self.fail("`)`");
            }
            return Ok(a);
        }
        if self.is_keyword("bot") {
            self.pos += 1;
            return Ok(Formula::Bot);
        }
        match self.peek().cloned() {
            Some(Tok::Ident(p)) if !KEYWORDS.contains(&p.as_str()) => {
                let is_pred = if self.peek_at(1) == Some(&Tok::LParen) {
                    // P(...) is a predicate unless the closing paren is
                    // followed by `in`/`eq`.
                    let close = self.matching_paren(self.pos + 1)?;
                    !matches!(self.toks.get(close + 1), Some((_, Tok::Ident(k))) if k == "in" || k == "eq")
                } else {
                    !matches!(self.peek_at(1), Some(Tok::Ident(k)) if k == "in" || k == "eq")
                };
                if is_pred {
                    self.pos += 1;
                    let args = if self.peek() == Some(&Tok::LParen) { self.args()? } else { Vec::new() };
                    self.sig.check(&p, args.len(), true)?;
                    return Ok(Formula::pred(&p, args));
                }
                self.relation()
            }
            Some(Tok::Name(_)) => self.relation(),
            _ => self.fail("an atom"),
        }
    }

    fn matching_paren(&self, open: usize) -> Result<usize, SyntaxError> {
        let mut depth = 0usize;
        for (k, (_, t)) in self.toks.iter().enumerate().skip(open) {
            match t {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(k);
                    }
                }
                _ => {}
            }
        }
        self.fail("`)`")
    }

    fn relation(&mut self) -> Result<Formula, SyntaxError> {
        let a = self.term()?;
        if self.is_keyword("in") {
            self.pos += 1;
            return Ok(Formula::mem(a, self.term()?));
        }
        if self.is_keyword("eq") {
            self.pos += 1;
            return Ok(Formula::eq(a, self.term()?));
        }
        self.fail("`in` or `eq`")
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        if !self.eat(&Tok::LParen) {
            return self.fail("`(`");
        }
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            if !self.eat(&Tok::Comma) {
                return self.fail("`,` or `)`");
            }
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Name(id)) => {
                self.pos += 1;
                Ok(Term::Name(NameId(id)))
            }
            Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let args = self.args()?;
                    self.sig.check(&x, args.len(), false)?;
                    return Ok(Term::App(x, args));
                }
                if self.sig.functions.get(&x) == Some(&0) {
                    return Ok(Term::App(x, Vec::new()));
                }
                Ok(Term::Var(x))
            }
            _ => self.fail("a term"),
        }
    }
}

pub fn parse_formula(text: &str, signature: &mut Signature) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        sig: signature,
    };
    let phi = p.iff()?;
    if p.pos != p.toks.len() {
        return p.fail("end of input");
    }
    Ok(phi)
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    Qn4,
    Qn3,
    Qcw,
}

impl System {
    pub fn as_str(self) -> &'static str {
        match self {
            System::Qn4 => "n4",
            System::Qn3 => "n3",
            System::Qcw => "qcw",
        }
    }
}

impl std::str::FromStr for System {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "n4" | "qn4" => Ok(System::Qn4),
            "n3" | "qn3" => Ok(System::Qn3),
            "qcw" | "cw" | "comega" => Ok(System::Qcw),
            _ => Err(format!("unknown system `{s}` (expected n4, n3 or qcw)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(String),
    Premise(usize),
    Mp(usize, usize),
    R3(usize),
    R4(usize),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(id) => write!(f, "[axiom {id}]"),
            Justification::Premise(k) => write!(f, "[premise {k}]"),
            Justification::Mp(i, j) => write!(f, "[mp {i} {j}]"),
            Justification::R3(i) => write!(f, "[r3 {i}]"),
            Justification::R4(i) => write!(f, "[r4 {i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationLine {
    pub number: usize,
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub name: String,
    pub system: System,
    pub premises: BTreeMap<usize, Formula>,
    pub lines: Vec<DerivationLine>,
    pub qed: usize,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "derivation {} system={}", self.name, self.system.as_str())?;
        for (k, p) in &self.premises {
            writeln!(f, "premise {k}: {p}")?;
        }
        for l in &self.lines {
            writeln!(f, "{}: {} {}", l.number, l.formula, l.justification)?;
        }
        writeln!(f, "qed {}", self.qed)
    }
}

fn parse_justification(text: &str, lineno: usize) -> Result<Justification, FileError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| FileError::at(lineno, format!("bad line reference `{s}`")))
    };
    match words.as_slice() {
        ["axiom", id] => Ok(Justification::Axiom(id.to_string())),
        ["premise", k] => Ok(Justification::Premise(num(k)?)),
        ["mp", i, j] => Ok(Justification::Mp(num(i)?, num(j)?)),
        ["r3", i] => Ok(Justification::R3(num(i)?)),
        ["r4", i] => Ok(Justification::R4(num(i)?)),
        _ => Err(FileError::at(lineno, format!("unknown justification `[{text}]`"))),
    }
}

/// Reads a derivation file. All formulas share one permissive signature.
pub fn parse_derivation(text: &str) -> Result<Derivation, FileError> {
    let mut sig = Signature::permissive();
    let mut header: Option<(String, System)> = None;
    let mut premises = BTreeMap::new();
    let mut lines = Vec::new();
    let mut qed = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let formula = |s: &str, sig: &mut Signature| {
            parse_formula(s.trim(), sig).map_err(|e| FileError::at(lineno, e.to_string()))
        };
        if let Some(rest) = line.strip_prefix("derivation ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let (name, sys) = match words.as_slice() {
                [name, sys] => (*name, sys.strip_prefix("system=")),
                _ => return Err(FileError::at(lineno, "expected `derivation <name> system=<n4|n3|qcw>`")),
            };
            let sys = sys
                .ok_or_else(|| FileError::at(lineno, "expected `system=`"))?
                .parse()
                .map_err(|e: String| FileError::at(lineno, e))?;
            header = Some((name.to_string(), sys));
        } else if let Some(rest) = line.strip_prefix("premise ") {
            let (k, f) = rest
                .split_once(':')
                .ok_or_else(|| FileError::at(lineno, "expected `premise <k>: <formula>`"))?;
            let k: usize = k.trim().parse().map_err(|_| FileError::at(lineno, "bad premise index"))?;
            if premises.insert(k, formula(f, &mut sig)?).is_some() {
                return Err(FileError::at(lineno, format!("premise {k} declared twice")));
            }
        } else if let Some(rest) = line.strip_prefix("qed ") {
            qed = Some(rest.trim().parse().map_err(|_| FileError::at(lineno, "bad qed line"))?);
        } else {
            let (n, rest) = line
                .split_once(':')
                .ok_or_else(|| FileError::at(lineno, "expected `<n>: <formula> [<justification>]`"))?;
            let number: usize = n.trim().parse().map_err(|_| FileError::at(lineno, "bad line number"))?;
            let open = rest
                .rfind('[')
                .ok_or_else(|| FileError::at(lineno, "missing justification"))?;
            let close = rest[open..]
                .find(']')
                .ok_or_else(|| FileError::at(lineno, "unclosed justification"))?;
            let justification = parse_justification(&rest[open + 1..open + close], lineno)?;
            lines.push(DerivationLine {
                number,
                formula: formula(&rest[..open], &mut sig)?,
                justification,
            });
        }
    }
    let (name, system) = header.ok_or_else(|| FileError::at(1, "missing `derivation` header"))?;
    let qed = qed.ok_or_else(|| FileError::at(text.lines().count(), "missing `qed` line"))?;
    Ok(Derivation {
        name,
        system,
        premises,
        lines,
        qed,
    })
}
