//! First-order Θ-structures over an F-structure and their valuations.
//!
//! A Θ-structure interprets predicates as tables `S^n → A`, functions as
//! tables `S^n → S`, and fixes `||~P(s̄)||` by a second table with values in
//! `N_{||P(s̄)||}`. Besides concrete structures, every table can be left
//! open and resolved lazily through [`Choices`], so that an exhaustive
//! search only branches on entries a formula actually reads.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::Elem;
use crate::fidel::{FStructure, Kind};
use crate::syntax::{Atom, Formula, Term};
use crate::valuation::{explore, Choices, EvalError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredTable {
    pub arity: usize,
    pub values: Vec<Elem>,
    /// `||~P(s̄)||` for each argument tuple.
    pub negated: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncTable {
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaStructure {
    pub structure: FStructure,
    /// Size of the carrier `S = {0, …, domain-1}`.
    pub domain: usize,
    pub predicates: BTreeMap<String, PredTable>,
    pub functions: BTreeMap<String, FuncTable>,
    /// `||~⊥||`, an element of `N_0`.
    pub neg_bot: Elem,
}

fn tuple_index(domain: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * domain + a)
}

fn tuple_text(args: &[usize]) -> String {
    args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

impl ThetaStructure {
    /// A structure with empty signature over a carrier of `domain` elements.
    pub fn new(structure: FStructure, domain: usize) -> Self {
        let neg_bot = structure.negs(structure.algebra().bottom())[0];
        ThetaStructure {
            structure,
            domain,
            predicates: BTreeMap::new(),
            functions: BTreeMap::new(),
            neg_bot,
        }
    }

    pub fn with_predicate(mut self, name: &str, arity: usize, values: Vec<Elem>, negated: Vec<Elem>) -> Self {
        self.predicates.insert(name.to_string(), PredTable { arity, values, negated });
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize, table: Vec<usize>) -> Self {
        self.functions.insert(name.to_string(), FuncTable { arity, table });
        self
    }

    /// Builds a concrete structure from lazily resolved entries; entries
    /// never consulted get bottom, the first admissible negation and 0.
    pub fn from_choices(
        structure: FStructure,
        domain: usize,
        predicates: &[(String, usize)],
        functions: &[(String, usize)],
        assigned: &BTreeMap<String, Elem>,
    ) -> Self {
        let mut t = ThetaStructure::new(structure, domain);
        if let Some(&v) = assigned.get("~bot") {
            t.neg_bot = v;
        }
        let h = t.structure.algebra().clone();
        for (p, n) in predicates {
            let count = domain.pow(*n as u32);
            let mut values = vec![h.bottom(); count];
            let mut negated = vec![0; count];
            for (i, tuple) in tuples(domain, *n).enumerate() {
                let args = tuple_text(&tuple);
                values[i] = assigned.get(&format!("{p}({args})")).copied().unwrap_or(h.bottom());
                negated[i] = assigned
                    .get(&format!("~{p}({args})"))
                    .copied()
                    .unwrap_or(t.structure.negs(values[i])[0]);
            }
            t.predicates.insert(p.clone(), PredTable { arity: *n, values, negated });
        }
        for (g, n) in functions {
            let table = tuples(domain, *n)
                .map(|tuple| assigned.get(&format!("{g}({})", tuple_text(&tuple))).copied().unwrap_or(0))
                .collect();
            t.functions.insert(g.clone(), FuncTable { arity: *n, table });
        }
        t
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::BadStructure(m));
        if self.domain == 0 {
            return bad("empty carrier".into());
        }
        let h = self.structure.algebra();
        if !self.structure.admits(h.bottom(), self.neg_bot) {
            return bad(format!("~bot value {} not in N_0", self.neg_bot));
        }
        for (p, t) in &self.predicates {
            let count = self.domain.pow(t.arity as u32);
            if t.values.len() != count || t.negated.len() != count {
                return bad(format!("predicate {p} needs {count} entries"));
            }
            for (i, (&v, &n)) in t.values.iter().zip(&t.negated).enumerate() {
                if v >= h.size() {
                    return bad(format!("predicate {p} entry {i} is not an element"));
                }
                if !self.structure.admits(v, n) {
                    return bad(format!("~{p} entry {i}: {n} not in N_{v}"));
                }
            }
        }
        for (g, t) in &self.functions {
            let count = self.domain.pow(t.arity as u32);
            if t.table.len() != count || t.table.iter().any(|&s| s >= self.domain) {
                return bad(format!("function {g} needs {count} entries in the carrier"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ThetaStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "carrier: {} elements, kind {}", self.domain, self.structure.kind().as_str())?;
        writeln!(f, "~bot = {}", self.neg_bot)?;
        for (p, t) in &self.predicates {
            for (i, tuple) in tuples(self.domain, t.arity).enumerate() {
                let args = tuple_text(&tuple);
                writeln!(f, "{p}({args}) = {}   ~{p}({args}) = {}", t.values[i], t.negated[i])?;
            }
        }
        for (g, t) in &self.functions {
            for (i, tuple) in tuples(self.domain, t.arity).enumerate() {
                writeln!(f, "{g}({}) = {}", tuple_text(&tuple), t.table[i])?;
            }
        }
        Ok(())
    }
}

/// All argument tuples in lexicographic order.
pub fn tuples(domain: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = domain.pow(arity as u32);
    (0..count).map(move |mut i| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = i % domain;
            i /= domain;
        }
        t
    })
}

/// Source of table entries during evaluation.
trait Tables {
    fn pred(&mut self, p: &str, args: &[usize]) -> Result<Elem, EvalError>;
    fn neg_pred(&mut self, p: &str, args: &[usize], domain: Vec<Elem>) -> Result<Elem, EvalError>;
    fn neg_bot(&mut self, domain: Vec<Elem>) -> Result<Elem, EvalError>;
    fn func(&mut self, g: &str, args: &[usize], carrier: usize) -> Result<usize, EvalError>;
    fn compound(&mut self, key: String, domain: Vec<Elem>) -> Result<Elem, EvalError>;
}

struct Concrete<'a, 'c> {
    theta: &'a ThetaStructure,
    choices: Option<&'c mut Choices<String>>,
}

impl Tables for Concrete<'_, '_> {
    fn pred(&mut self, p: &str, args: &[usize]) -> Result<Elem, EvalError> {
        let t = self.theta.predicates.get(p).ok_or_else(|| EvalError::UnsupportedAtom(p.into()))?;
        if t.arity != args.len() {
            return Err(EvalError::UnsupportedAtom(format!("{p}/{}", args.len())));
        }
        Ok(t.values[tuple_index(self.theta.domain, args)])
    }
    fn neg_pred(&mut self, p: &str, args: &[usize], _: Vec<Elem>) -> Result<Elem, EvalError> {
        let t = &self.theta.predicates[p];
        Ok(t.negated[tuple_index(self.theta.domain, args)])
    }
    fn neg_bot(&mut self, _: Vec<Elem>) -> Result<Elem, EvalError> {
        Ok(self.theta.neg_bot)
    }
    fn func(&mut self, g: &str, args: &[usize], _: usize) -> Result<usize, EvalError> {
        let t = self.theta.functions.get(g).ok_or_else(|| EvalError::UnsupportedAtom(g.into()))?;
        if t.arity != args.len() {
            return Err(EvalError::UnsupportedAtom(format!("{g}/{}", args.len())));
        }
        Ok(t.table[tuple_index(self.theta.domain, args)])
    }
    fn compound(&mut self, key: String, domain: Vec<Elem>) -> Result<Elem, EvalError> {
        match self.choices.as_deref_mut() {
            Some(c) => c.choose(key, domain),
            None => Err(EvalError::UncoveredNegation(key)),
        }
    }
}

struct Lazy<'c> {
    algebra_size: usize,
    choices: &'c mut Choices<String>,
}

impl Tables for Lazy<'_> {
    fn pred(&mut self, p: &str, args: &[usize]) -> Result<Elem, EvalError> {
        self.choices.choose(format!("{p}({})", tuple_text(args)), (0..self.algebra_size).collect())
    }
    fn neg_pred(&mut self, p: &str, args: &[usize], domain: Vec<Elem>) -> Result<Elem, EvalError> {
        self.choices.choose(format!("~{p}({})", tuple_text(args)), domain)
    }
    fn neg_bot(&mut self, domain: Vec<Elem>) -> Result<Elem, EvalError> {
        self.choices.choose("~bot".into(), domain)
    }
    fn func(&mut self, g: &str, args: &[usize], carrier: usize) -> Result<usize, EvalError> {
        self.choices.choose(format!("{g}({})", tuple_text(args)), (0..carrier).collect())
    }
    fn compound(&mut self, key: String, domain: Vec<Elem>) -> Result<Elem, EvalError> {
        self.choices.choose(key, domain)
    }
}

struct Evaluator<'s, T> {
    fs: &'s FStructure,
    carrier: usize,
    tables: T,
}

type Vars = Vec<(String, usize)>;

impl<T: Tables> Evaluator<'_, T> {
    fn term(&mut self, t: &Term, vars: &Vars) -> Result<usize, EvalError> {
        match t {
            Term::Var(x) => vars
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, s)| *s)
                .ok_or_else(|| EvalError::FreeVariable(x.clone())),
            Term::App(g, args) => {
                let vals = args.iter().map(|a| self.term(a, vars)).collect::<Result<Vec<_>, _>>()?;
                self.tables.func(g, &vals, self.carrier)
            }
            Term::Name(_) => Err(EvalError::UnsupportedAtom(t.to_string())),
        }
    }

    fn atom_args(&mut self, a: &Atom, vars: &Vars) -> Result<(String, Vec<usize>), EvalError> {
        let (p, ts): (&str, Vec<&Term>) = match a {
            Atom::Mem(s, t) => ("in", vec![s, t]),
            Atom::Eq(s, t) => ("eq", vec![s, t]),
            Atom::Pred(p, args) => (p.as_str(), args.iter().collect()),
        };
        let vals = ts.into_iter().map(|t| self.term(t, vars)).collect::<Result<Vec<_>, _>>()?;
        Ok((p.to_string(), vals))
    }

    fn compound_key(phi: &Formula, vars: &Vars) -> String {
        let fv = phi.free_vars();
        let bound: Vec<String> = fv
            .iter()
            .map(|x| {
                let s = vars.iter().rev().find(|(y, _)| y == x).map(|(_, s)| *s);
                format!("{x}={}", s.map_or("?".into(), |s| s.to_string()))
            })
            .collect();
        format!("{phi} [{}]", bound.join(","))
    }

    fn eval(&mut self, phi: &Formula, vars: &mut Vars) -> Result<Elem, EvalError> {
        let h = self.fs.algebra();
        match phi {
            Formula::Bot => Ok(h.bottom()),
            Formula::Atom(a) => {
                let (p, args) = self.atom_args(a, vars)?;
                self.tables.pred(&p, &args)
            }
            Formula::And(a, b) => {
                let x = self.eval(a, vars)?;
                let y = self.eval(b, vars)?;
                Ok(self.fs.algebra().meet(x, y))
            }
            Formula::Or(a, b) => {
                let x = self.eval(a, vars)?;
                let y = self.eval(b, vars)?;
                Ok(self.fs.algebra().join(x, y))
            }
            Formula::Imp(a, b) => {
                let x = self.eval(a, vars)?;
                let y = self.eval(b, vars)?;
                Ok(self.fs.algebra().imp(x, y))
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let universal = matches!(phi, Formula::Forall(..));
                let mut acc = if universal { h.top() } else { h.bottom() };
                for s in 0..self.carrier {
                    vars.push((x.clone(), s));
                    let r = self.eval(body, vars);
                    vars.pop();
                    let h = self.fs.algebra();
                    acc = if universal { h.meet(acc, r?) } else { h.join(acc, r?) };
                }
                Ok(acc)
            }
            Formula::Neg(a) => match self.fs.kind() {
                Kind::N4 => self.neg_n4(phi, a, vars),
                Kind::Comega => self.neg_comega(phi, a, vars),
            },
        }
    }

    fn neg_atomic(&mut self, a: &Formula, vars: &mut Vars) -> Result<Option<Elem>, EvalError> {
        match a {
            Formula::Bot => {
                let domain = self.fs.negs(self.fs.algebra().bottom()).to_vec();
                self.tables.neg_bot(domain).map(Some)
            }
            Formula::Atom(at) => {
                let (p, args) = self.atom_args(at, vars)?;
                let x = self.tables.pred(&p, &args)?;
                let domain = self.fs.negs(x).to_vec();
                self.tables.neg_pred(&p, &args, domain).map(Some)
            }
            _ => Ok(None),
        }
    }

    fn neg_n4(&mut self, phi: &Formula, a: &Formula, vars: &mut Vars) -> Result<Elem, EvalError> {
        if let Some(v) = self.neg_atomic(a, vars)? {
            return Ok(v);
        }
        match a {
            Formula::Neg(b) => self.eval(b, vars),
            Formula::And(b, c) => {
                let x = self.eval(&Formula::neg((**b).clone()), vars)?;
                let y = self.eval(&Formula::neg((**c).clone()), vars)?;
                Ok(self.fs.algebra().join(x, y))
            }
            Formula::Or(b, c) => {
                let x = self.eval(&Formula::neg((**b).clone()), vars)?;
                let y = self.eval(&Formula::neg((**c).clone()), vars)?;
                Ok(self.fs.algebra().meet(x, y))
            }
            Formula::Imp(b, c) => {
                let x = self.eval(b, vars)?;
                let y = self.eval(&Formula::neg((**c).clone()), vars)?;
                Ok(self.fs.algebra().meet(x, y))
            }
            _ => Err(EvalError::NegOverQuantifier(phi.to_string())),
        }
    }

    fn neg_comega(&mut self, phi: &Formula, a: &Formula, vars: &mut Vars) -> Result<Elem, EvalError> {
        if let Some(v) = self.neg_atomic(a, vars)? {
            return Ok(v);
        }
        let x = self.eval(a, vars)?;
        let mut domain = self.fs.negs(x).to_vec();
        if let Formula::Neg(b) = a {
            let y = self.eval(b, vars)?;
            domain.retain(|&d| self.fs.algebra().leq(d, y));
        }
        self.tables.compound(Self::compound_key(phi, vars), domain)
    }
}

fn vars_of(assignment: &BTreeMap<String, usize>) -> Vars {
    assignment.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

/// `||phi||_v` in a concrete structure, using the N4 clauses for negation.
pub fn eval_qn4(phi: &Formula, theta: &ThetaStructure, assignment: &BTreeMap<String, usize>) -> Result<Elem, EvalError> {
    let fs = theta.structure.clone().with_kind(Kind::N4);
    Evaluator {
        fs: &fs,
        carrier: theta.domain,
        tables: Concrete { theta, choices: None },
    }
    .eval(phi, &mut vars_of(assignment))
}

/// `||phi||_v` in a concrete C_ω structure; negations of compound formulas
/// are read from `choices`.
pub fn eval_qcw(
    phi: &Formula,
    theta: &ThetaStructure,
    assignment: &BTreeMap<String, usize>,
    choices: &mut Choices<String>,
) -> Result<Elem, EvalError> {
    let fs = theta.structure.clone().with_kind(Kind::Comega);
    Evaluator {
        fs: &fs,
        carrier: theta.domain,
        tables: Concrete {
            theta,
            choices: Some(choices),
        },
    }
    .eval(phi, &mut vars_of(assignment))
}

/// Evaluates a closed `phi` in every Θ-structure over `fs` with a carrier
/// of `carrier` elements, branching only on the table entries it reads.
/// Returns each partial table with the resulting value.
pub fn explore_theta(
    phi: &Formula,
    fs: &FStructure,
    carrier: usize,
    cap: usize,
) -> Result<Vec<(BTreeMap<String, Elem>, Elem)>, EvalError> {
    explore(cap, |choices| {
        Evaluator {
            fs,
            carrier,
            tables: Lazy {
                algebra_size: fs.algebra().size(),
                choices,
            },
        }
        .eval(phi, &mut Vec::new())
    })
}

/// Like [`explore_theta`] for a sequent: the value of each formula in
/// `formulas` under one shared structure.
pub fn explore_theta_many(
    formulas: &[Formula],
    fs: &FStructure,
    carrier: usize,
    cap: usize,
) -> Result<Vec<(BTreeMap<String, Elem>, Vec<Elem>)>, EvalError> {
    explore(cap, |choices| {
        let mut ev = Evaluator {
            fs,
            carrier,
            tables: Lazy {
                algebra_size: fs.algebra().size(),
                choices,
            },
        };
        formulas.iter().map(|phi| ev.eval(phi, &mut Vec::new())).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HeytingAlgebra;
    use crate::fidel::saturate;
    use crate::syntax::{parse_formula, Signature};

    fn f(s: &str) -> Formula {
        parse_formula(s, &mut Signature::permissive()).unwrap()
    }

    fn sample() -> ThetaStructure {
        let fs = saturate(&HeytingAlgebra::chain(3), Kind::N4);
        ThetaStructure::new(fs, 2)
            .with_predicate("P", 1, vec![1, 2], vec![2, 0])
            .with_function("c", 0, vec![0])
    }

    #[test]
    fn table_lookup_and_quantifiers() {
        let t = sample();
        t.validate().unwrap();
        let none = BTreeMap::new();
        assert_eq!(eval_qn4(&f("P(c())"), &t, &none).unwrap(), 1);
        assert_eq!(eval_qn4(&f("forall x . P(x)"), &t, &none).unwrap(), 1);
        assert_eq!(eval_qn4(&f("exists x . P(x)"), &t, &none).unwrap(), 2);
        assert_eq!(eval_qn4(&f("~P(x)"), &t, &BTreeMap::from([("x".to_string(), 1)])).unwrap(), 0);
    }

    #[test]
    fn negation_clauses() {
        let t = sample();
        let v = BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 1)]);
        // ||~(P(x) -> P(y))|| = ||P(x)|| ∧ ||~P(y)|| = 1 ∧ 0
        assert_eq!(eval_qn4(&f("~(P(x) -> P(y))"), &t, &v).unwrap(), 0);
        assert_eq!(eval_qn4(&f("~~P(x)"), &t, &v).unwrap(), 1);
        assert_eq!(eval_qn4(&f("~(P(x) & P(y))"), &t, &v).unwrap(), 2);
        assert!(matches!(
            eval_qn4(&f("~forall x . P(x)"), &t, &v),
            Err(EvalError::NegOverQuantifier(_))
        ));
    }

    #[test]
    fn validation_rejects_bad_negation_entries() {
        let fs = saturate(&HeytingAlgebra::chain(3), Kind::N4);
        let t = ThetaStructure::new(fs, 1).with_predicate("P", 0, vec![0], vec![0]);
        assert!(t.validate().is_err());
    }

    #[test]
    fn lazy_exploration_covers_tables() {
        let fs = saturate(&HeytingAlgebra::chain(2), Kind::N4);
        let out = explore_theta(&f("p() | ~p()"), &fs, 1, 1000).unwrap();
        // p = 0 forces ~p = 1; p = 1 leaves ~p ∈ {0, 1}.
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|(_, v)| *v == 1));
    }

    #[test]
    fn n10_instances_are_top_in_small_structures() {
        let phi = f("~(P(x) -> Q(x)) <-> (P(x) & ~Q(x))");
        for h in [HeytingAlgebra::chain(2), HeytingAlgebra::chain(3), HeytingAlgebra::powerset(2)] {
            let fs = saturate(&h, Kind::N4);
            for carrier in 1..=2 {
                let closed = Formula::forall("x", phi.clone());
                let out = explore_theta(&closed, &fs, carrier, 100_000).unwrap();
                assert!(out.iter().all(|(_, v)| *v == h.top()));
            }
        }
    }

    #[test]
    fn comega_compound_choices_respect_double_negation() {
        let fs = saturate(&HeytingAlgebra::chain(3), Kind::Comega);
        let out = explore_theta(&f("~~(p() & p()) -> (p() & p())"), &fs, 1, 1000).unwrap();
        assert!(out.iter().all(|(_, v)| *v == 2));
    }

    #[test]
    fn concrete_structure_from_choices_reproduces_value() {
        let fs = saturate(&HeytingAlgebra::chain(3), Kind::N4);
        let phi = f("forall x . (P(x) & ~P(x))");
        for (assigned, v) in explore_theta(&phi, &fs, 2, 10_000).unwrap() {
            let t = ThetaStructure::from_choices(fs.clone(), 2, &[("P".into(), 1)], &[], &assigned);
            t.validate().unwrap();
            assert_eq!(eval_qn4(&phi, &t, &BTreeMap::new()).unwrap(), v);
        }
    }
}
