//! Hilbert-style proof checking for QN4, N3 (QN4 with N14) and QC_ω,
//! and a semantic soundness audit of the axiom schemas over small
//! Θ-structures.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::enumerate_heyting;
use crate::fidel::{enumerate_structures, FStructure, Kind};
use crate::syntax::{free_for, parse_formula, substitute, universal_closure, Atom, Derivation, Formula, Justification, Signature, System, Term};
use crate::theta::explore_theta;
use crate::valuation::EvalError;

/// Metavariables in schema templates are 0-ary predicates named `?a`, `?b`, `?c`.
fn meta(name: &str) -> Formula {
    Formula::pred(&format!("?{name}"), vec![])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaShape {
    /// Propositional template over metavariables.
    Template(Formula),
    /// `φ(x/t) → ∃x φ`, `t` free for `x` in `φ`.
    A1,
    /// `∀x φ → φ(x/t)`, `t` free for `x` in `φ`.
    A2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomSchema {
    pub id: &'static str,
    pub shape: SchemaShape,
}

fn template(id: &'static str, f: Formula) -> AxiomSchema {
    AxiomSchema {
        id,
        shape: SchemaShape::Template(f),
    }
}

/// Every schema the kernel knows, by id.
pub fn all_schemas() -> Vec<AxiomSchema> {
    let (a, b, c) = (meta("a"), meta("b"), meta("c"));
    let imp = Formula::imp;
    let and = Formula::and;
    let or = Formula::or;
    let neg = Formula::neg;
    let iff = Formula::iff;
    let double_neg = iff(neg(neg(a.clone())), a.clone());
    vec![
        template("N1", imp(a.clone(), imp(b.clone(), a.clone()))),
        template(
            "N2",
            imp(
                imp(a.clone(), imp(b.clone(), c.clone())),
                imp(imp(a.clone(), b.clone()), imp(a.clone(), c.clone())),
            ),
        ),
        template("N3", imp(and(a.clone(), b.clone()), b.clone())),
        template("N4", imp(and(a.clone(), b.clone()), a.clone())),
        template("N5", imp(a.clone(), imp(b.clone(), and(a.clone(), b.clone())))),
        template("N6", imp(a.clone(), or(a.clone(), b.clone()))),
        template("N7", imp(b.clone(), or(a.clone(), b.clone()))),
        template(
            "N8",
            imp(
                imp(a.clone(), c.clone()),
                imp(imp(b.clone(), c.clone()), imp(or(a.clone(), b.clone()), c.clone())),
            ),
        ),
        template("N9", iff(neg(imp(a.clone(), b.clone())), and(a.clone(), neg(b.clone())))),
        template("N10", iff(neg(and(a.clone(), b.clone())), or(neg(a.clone()), neg(b.clone())))),
        template("N11", iff(neg(or(a.clone(), b.clone())), and(neg(a.clone()), neg(b.clone())))),
        // The two negations coincide here, so N12 and N13 are one schema.
        template("N12", double_neg.clone()),
        template("N13", double_neg),
        template("N14", imp(neg(a.clone()), imp(a.clone(), b.clone()))),
        template("Cw1", or(a.clone(), neg(a.clone()))),
        template("Cw2", imp(neg(neg(a.clone())), a)),
        AxiomSchema {
            id: "A1",
            shape: SchemaShape::A1,
        },
        AxiomSchema {
            id: "A2",
            shape: SchemaShape::A2,
        },
    ]
}

/// Schema ids available in `system`.
pub fn system_schemas(system: System) -> Vec<&'static str> {
    let positive = ["N1", "N2", "N3", "N4", "N5", "N6", "N7", "N8"];
    let mut ids: Vec<&'static str> = positive.to_vec();
    match system {
        System::Qn4 | System::Qn3 => {
            ids.extend(["N9", "N10", "N11", "N12", "N13"]);
            if system == System::Qn3 {
                ids.push("N14");
            }
        }
        System::Qcw => ids.extend(["Cw1", "Cw2"]),
    }
    ids.extend(["A1", "A2"]);
    ids
}

/// Looks up a schema by id, accepting `Cω1` for `Cw1` and any letter case.
pub fn schema(id: &str) -> Option<AxiomSchema> {
    let norm = id.replace('ω', "w").to_ascii_lowercase();
    all_schemas().into_iter().find(|s| s.id.to_ascii_lowercase() == norm)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("formula is not an instance of {0}")]
    NoMatch(String),
    #[error("side condition violated: {0}")]
    SideConditionViolated(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaMatch {
    /// Metavariable (`a`, `b`, `c`) to formula.
    pub bindings: BTreeMap<String, Formula>,
    /// For A1/A2: the quantified body, its variable and the term.
    pub quantifier: Option<(Formula, String, Term)>,
}

fn match_template(pat: &Formula, phi: &Formula, b: &mut BTreeMap<String, Formula>) -> bool {
    match (pat, phi) {
        (Formula::Atom(Atom::Pred(p, args)), _) if p.starts_with('?') && args.is_empty() => {
            let key = p[1..].to_string();
            match b.get(&key) {
                Some(bound) => bound == phi,
                None => {
                    b.insert(key, phi.clone());
                    true
                }
            }
        }
        (Formula::And(p1, p2), Formula::And(f1, f2))
        | (Formula::Or(p1, p2), Formula::Or(f1, f2))
        | (Formula::Imp(p1, p2), Formula::Imp(f1, f2)) => match_template(p1, f1, b) && match_template(p2, f2, b),
        (Formula::Neg(p), Formula::Neg(f)) => match_template(p, f, b),
        _ => pat == phi,
    }
}

/// Finds the term `t` with `body(x/t) = target`, if any. `Ok(None)` means
/// `x` has no free occurrence that fixes `t`.
fn find_term(body: &Formula, x: &str, target: &Formula) -> Result<Option<Term>, ()> {
    fn unify_term(pat: &Term, t: &Term, x: &str, bound: bool, found: &mut Option<Term>) -> Result<(), ()> {
        match (pat, t) {
            (Term::Var(y), _) if y == x && !bound => match found {
                Some(prev) if prev != t => Err(()),
                Some(_) => Ok(()),
                None => {
                    *found = Some(t.clone());
                    Ok(())
                }
            },
            (Term::App(f, ps), Term::App(g, ts)) if f == g && ps.len() == ts.len() => {
                ps.iter().zip(ts).try_for_each(|(p, t)| unify_term(p, t, x, bound, found))
            }
            _ if pat == t => Ok(()),
            _ => Err(()),
        }
    }
    fn go(pat: &Formula, t: &Formula, x: &str, bound: bool, found: &mut Option<Term>) -> Result<(), ()> {
        match (pat, t) {
            (Formula::Bot, Formula::Bot) => Ok(()),
            (Formula::Atom(a), Formula::Atom(b)) => {
                let (pa, ta) = (a.terms(), b.terms());
                let same_head = matches!(
                    (a, b),
                    (Atom::Mem(..), Atom::Mem(..)) | (Atom::Eq(..), Atom::Eq(..))
                ) || matches!((a, b), (Atom::Pred(p, _), Atom::Pred(q, _)) if p == q);
                if !same_head || pa.len() != ta.len() {
                    return Err(());
                }
                pa.iter().zip(ta).try_for_each(|(p, t)| unify_term(p, t, x, bound, found))
            }
            (Formula::And(p1, p2), Formula::And(t1, t2))
            | (Formula::Or(p1, p2), Formula::Or(t1, t2))
            | (Formula::Imp(p1, p2), Formula::Imp(t1, t2)) => {
                go(p1, t1, x, bound, found)?;
                go(p2, t2, x, bound, found)
            }
            (Formula::Neg(p), Formula::Neg(t)) => go(p, t, x, bound, found),
            (Formula::Forall(y, p), Formula::Forall(z, t)) | (Formula::Exists(y, p), Formula::Exists(z, t)) if y == z => {
                go(p, t, x, bound || y == x, found)
            }
            _ => Err(()),
        }
    }
    let mut found = None;
    go(body, target, x, false, &mut found)?;
    Ok(found)
}

fn match_quantifier(schema: &str, body: &Formula, x: &str, inst: &Formula) -> Result<SchemaMatch, MatchError> {
    let no = || MatchError::NoMatch(schema.to_string());
    let t = find_term(body, x, inst).map_err(|()| no())?.unwrap_or_else(|| Term::var(x));
    if !free_for(&t, x, body) {
        return Err(MatchError::SideConditionViolated(format!("{t} is not free for {x} in {body}")));
    }
    let s = substitute(body, x, &t).map_err(|e| MatchError::SideConditionViolated(e.to_string()))?;
    if &s != inst {
        return Err(no());
    }
    Ok(SchemaMatch {
        bindings: BTreeMap::new(),
        quantifier: Some((body.clone(), x.to_string(), t)),
    })
}

/// Matches `phi` against `schema`.
pub fn match_schema(phi: &Formula, schema: &AxiomSchema) -> Result<SchemaMatch, MatchError> {
    let no = || MatchError::NoMatch(schema.id.to_string());
    match &schema.shape {
        SchemaShape::Template(t) => {
            let mut bindings = BTreeMap::new();
            if match_template(t, phi, &mut bindings) {
                Ok(SchemaMatch {
                    bindings,
                    quantifier: None,
                })
            } else {
                Err(no())
            }
        }
        SchemaShape::A1 => match phi {
            Formula::Imp(inst, q) => match &**q {
                Formula::Exists(x, body) => match_quantifier(schema.id, body, x, inst),
                _ => Err(no()),
            },
            _ => Err(no()),
        },
        SchemaShape::A2 => match phi {
            Formula::Imp(q, inst) => match &**q {
                Formula::Forall(x, body) => match_quantifier(schema.id, body, x, inst),
                _ => Err(no()),
            },
            _ => Err(no()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("error line {line}: bad justification")]
    BadJustification { line: usize, reason: String },
    #[error("error line {line}: side condition violated for {variable}")]
    RuleSideCondition { line: usize, variable: String, reason: String },
    #[error("error line {line}: forward reference to line {target}")]
    ForwardReference { line: usize, target: usize },
    #[error("error: premise {index} is not closed ({formula}); use its universal closure")]
    OpenPremise { index: usize, formula: String },
    #[error("error line {line}: duplicate line number")]
    DuplicateLine { line: usize },
    #[error("error: qed refers to missing line {0}")]
    MissingQed(usize),
}

impl KernelError {
    pub fn line(&self) -> Option<usize> {
        match self {
            KernelError::BadJustification { line, .. }
            | KernelError::RuleSideCondition { line, .. }
            | KernelError::ForwardReference { line, .. }
            | KernelError::DuplicateLine { line } => Some(*line),
            KernelError::OpenPremise { .. } | KernelError::MissingQed(_) => None,
        }
    }

    /// Longer explanation, when there is one.
    pub fn reason(&self) -> Option<&str> {
        match self {
            KernelError::BadJustification { reason, .. } | KernelError::RuleSideCondition { reason, .. } => Some(reason),
            _ => None,
        }
    }
}

/// Checks `d` in its declared system.
pub fn check_derivation(d: &Derivation) -> Result<(), KernelError> {
    check_derivation_in(d, d.system)
}

/// Checks every line of `d` against the axioms and rules of `system`.
pub fn check_derivation_in(d: &Derivation, system: System) -> Result<(), KernelError> {
    for (&index, p) in &d.premises {
        if !p.is_closed() {
            return Err(KernelError::OpenPremise {
                index,
                formula: p.to_string(),
            });
        }
    }
    let allowed = system_schemas(system);
    let mut proved: BTreeMap<usize, &Formula> = BTreeMap::new();
    for l in &d.lines {
        let n = l.number;
        let bad = |reason: String| KernelError::BadJustification { line: n, reason };
        if proved.contains_key(&n) {
            return Err(KernelError::DuplicateLine { line: n });
        }
        let earlier = |i: usize| {
            proved
                .get(&i)
                .copied()
                .ok_or(KernelError::ForwardReference { line: n, target: i })
        };
        match &l.justification {
            Justification::Axiom(id) => {
                let s = schema(id)
                    .filter(|s| allowed.contains(&s.id))
                    .ok_or_else(|| bad(format!("{id} is not an axiom of {}", system.as_str())))?;
                match match_schema(&l.formula, &s) {
                    Ok(_) => {}
                    Err(MatchError::NoMatch(_)) => return Err(bad(format!("not an instance of {}", s.id))),
                    Err(MatchError::SideConditionViolated(why)) => {
                        let variable = match &s.shape {
                            SchemaShape::A1 | SchemaShape::A2 => quantified_var(&l.formula).unwrap_or_default(),
                            SchemaShape::Template(_) => String::new(),
                        };
                        return Err(KernelError::RuleSideCondition {
                            line: n,
                            variable,
                            reason: why,
                        });
                    }
                }
            }
            Justification::Premise(k) => match d.premises.get(k) {
                Some(p) if p == &l.formula => {}
                Some(_) => return Err(bad(format!("formula differs from premise {k}"))),
                None => return Err(bad(format!("no premise {k}"))),
            },
            Justification::Mp(i, j) => {
                let (a, b) = (earlier(*i)?, earlier(*j)?);
                let concludes = |minor: &Formula, major: &Formula| {
                    matches!(major, Formula::Imp(p, q) if **p == *minor && **q == l.formula)
                };
                if !concludes(a, b) && !concludes(b, a) {
                    return Err(bad(format!("lines {i} and {j} do not yield this formula by modus ponens")));
                }
            }
            Justification::R3(i) => {
                let src = earlier(*i)?;
                let (Formula::Imp(a, b), Formula::Imp(ea, b2)) = (src, &l.formula) else {
                    return Err(bad(format!("r3 needs implications at lines {i} and {n}")));
                };
                let Formula::Exists(x, a2) = &**ea else {
                    return Err(bad("r3 concludes an implication from an existential".into()));
                };
                if a2 != a || b2 != b {
                    return Err(bad(format!("not the r3 conclusion of line {i}")));
                }
                if b.is_free(x) {
                    return Err(KernelError::RuleSideCondition {
                        line: n,
                        variable: x.clone(),
                        reason: format!("{x} occurs free in the consequent"),
                    });
                }
            }
            Justification::R4(i) => {
                let src = earlier(*i)?;
                let (Formula::Imp(a, b), Formula::Imp(a2, fb)) = (src, &l.formula) else {
                    return Err(bad(format!("r4 needs implications at lines {i} and {n}")));
                };
                let Formula::Forall(x, b2) = &**fb else {
                    return Err(bad("r4 concludes an implication to a universal".into()));
                };
                if a2 != a || b2 != b {
                    return Err(bad(format!("not the r4 conclusion of line {i}")));
                }
                if a.is_free(x) {
                    return Err(KernelError::RuleSideCondition {
                        line: n,
                        variable: x.clone(),
                        reason: format!("{x} occurs free in the antecedent"),
                    });
                }
            }
        }
        proved.insert(n, &l.formula);
    }
    if !proved.contains_key(&d.qed) {
        return Err(KernelError::MissingQed(d.qed));
    }
    Ok(())
}

fn quantified_var(phi: &Formula) -> Option<String> {
    match phi {
        Formula::Imp(a, b) => match (&**a, &**b) {
            (Formula::Forall(x, _), _) | (_, Formula::Exists(x, _)) => Some(x.clone()),
            _ => None,
        },
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Soundness audit

/// Budget of a soundness audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditBudget {
    pub max_domain: usize,
    pub max_algebra: usize,
    /// Ceiling on table resolutions per instance and structure.
    pub max_assignments: usize,
}

impl Default for AuditBudget {
    fn default() -> Self {
        AuditBudget {
            max_domain: 2,
            max_algebra: 4,
            max_assignments: 200_000,
        }
    }
}

/// An instance and structure where an axiom does not evaluate to top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditFailure {
    pub schema: String,
    pub instance: Formula,
    pub structure: String,
    pub carrier: usize,
    pub tables: String,
    pub value: usize,
}

impl fmt::Display for AuditFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} has value {} with carrier {} in {} [{}]",
            self.schema, self.instance, self.value, self.carrier, self.structure, self.tables
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub system: System,
    pub budget: AuditBudget,
    pub structures: usize,
    pub instances: usize,
    pub evaluations: usize,
    /// Axioms of the system that failed somewhere (soundness violations).
    pub failures: Vec<AuditFailure>,
    /// Informational results outside the system, e.g. N14 over N4.
    pub findings: Vec<AuditFailure>,
}

impl AuditReport {
    pub fn sound(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn result_line(&self) -> String {
        format!(
            "RESULT system={} structures={} instances={} failures={} findings={} sound={}",
            self.system.as_str(),
            self.structures,
            self.instances,
            self.failures.len(),
            self.findings.len(),
            if self.sound() { "yes" } else { "no" }
        )
    }
}

fn fillers() -> Vec<Formula> {
    let mut sig = Signature::permissive();
    ["p()", "~p()", "P(x)", "p() -> q()"]
        .iter()
        .map(|s| parse_formula(s, &mut sig).expect("filler parses"))
        .collect()
}

fn instantiate(t: &Formula, b: &BTreeMap<String, Formula>) -> Formula {
    match t {
        Formula::Atom(Atom::Pred(p, args)) if p.starts_with('?') && args.is_empty() => b[&p[1..]].clone(),
        Formula::And(x, y) => Formula::and(instantiate(x, b), instantiate(y, b)),
        Formula::Or(x, y) => Formula::or(instantiate(x, b), instantiate(y, b)),
        Formula::Imp(x, y) => Formula::imp(instantiate(x, b), instantiate(y, b)),
        Formula::Neg(x) => Formula::neg(instantiate(x, b)),
        other => other.clone(),
    }
}

fn metavariables(t: &Formula, out: &mut Vec<String>) {
    match t {
        Formula::Atom(Atom::Pred(p, args)) if p.starts_with('?') && args.is_empty() => {
            if !out.contains(&p[1..].to_string()) {
                out.push(p[1..].to_string());
            }
        }
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Imp(x, y) => {
            metavariables(x, out);
            metavariables(y, out);
        }
        Formula::Neg(x) => metavariables(x, out),
        _ => {}
    }
}

/// Closed instances of a schema used by the audit.
pub fn schema_instances(s: &AxiomSchema) -> Vec<Formula> {
    let mut sig = Signature::permissive();
    let mut p = |text: &str| parse_formula(text, &mut sig).expect("instance parses");
    let raw = match &s.shape {
        SchemaShape::Template(t) => {
            let mut vars = Vec::new();
            metavariables(t, &mut vars);
            let fill = fillers();
            let total = fill.len().pow(vars.len() as u32);
            (0..total)
                .map(|mut i| {
                    let b = vars
                        .iter()
                        .map(|v| {
                            let f = fill[i % fill.len()].clone();
                            i /= fill.len();
                            (v.clone(), f)
                        })
                        .collect();
                    instantiate(t, &b)
                })
                .collect()
        }
        SchemaShape::A1 => vec![
            p("P(y) -> exists x . P(x)"),
            p("P(c()) -> exists x . P(x)"),
            p("(P(y) & ~P(y)) -> exists x . (P(x) & ~P(x))"),
            p("R(y, y) -> exists x . R(x, y)"),
            p("~P(f(y)) -> exists x . ~P(x)"),
            p("(forall z . R(y, z)) -> exists x . forall z . R(x, z)"),
        ],
        SchemaShape::A2 => vec![
            p("(forall x . P(x)) -> P(c())"),
            p("(forall x . P(x)) -> P(y)"),
            p("(forall x . (P(x) -> ~Q(x))) -> (P(y) -> ~Q(y))"),
            p("(forall x . R(x, y)) -> R(y, y)"),
            p("(forall x . ~P(x)) -> ~P(f(c()))"),
            p("(forall x . exists z . R(x, z)) -> exists z . R(y, z)"),
        ],
    };
    raw.iter().map(universal_closure).collect()
}

/// F-structures of the given kind over every algebra within budget.
pub fn audit_structures(kind: Kind, explosive: bool, max_algebra: usize) -> Result<Vec<FStructure>, EvalError> {
    let algebras = enumerate_heyting(max_algebra).map_err(|e| EvalError::BadStructure(e.to_string()))?;
    let mut out = Vec::new();
    for h in algebras {
        out.extend(enumerate_structures(&h, kind, explosive).map_err(|e| EvalError::BadStructure(e.to_string()))?);
    }
    Ok(out)
}

fn search_instance(
    schema: &str,
    phi: &Formula,
    structures: &[FStructure],
    budget: &AuditBudget,
) -> Result<(usize, Option<AuditFailure>), EvalError> {
    let results: Vec<Result<(usize, Option<AuditFailure>), EvalError>> = structures
        .par_iter()
        .map(|fs| {
            let mut evals = 0;
            for carrier in 1..=budget.max_domain {
                let outcomes = explore_theta(phi, fs, carrier, budget.max_assignments)?;
                evals += outcomes.len();
                let top = fs.algebra().top();
                if let Some((tables, v)) = outcomes.into_iter().find(|(_, v)| *v != top) {
                    let tables = tables.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
                    return Ok((
                        evals,
                        Some(AuditFailure {
                            schema: schema.to_string(),
                            instance: phi.clone(),
                            structure: fs.to_string().replace('\n', "; "),
                            carrier,
                            tables,
                            value: v,
                        }),
                    ));
                }
            }
            Ok((evals, None))
        })
        .collect();
    let mut total = 0;
    let mut first = None;
    for r in results {
        let (n, f) = r?;
        total += n;
        if first.is_none() {
            first = f;
        }
    }
    Ok((total, first))
}

/// Evaluates generated instances of every schema of `system` over all
/// Θ-structures within `budget` and all table choices. For QN4 it also
/// searches N14, whose counterexamples are reported as findings.
pub fn audit_soundness(system: System, budget: AuditBudget) -> Result<AuditReport, EvalError> {
    let (kind, explosive) = match system {
        System::Qn4 => (Kind::N4, false),
        System::Qn3 => (Kind::N4, true),
        System::Qcw => (Kind::Comega, false),
    };
    let structures = audit_structures(kind, explosive, budget.max_algebra)?;
    let mut report = AuditReport {
        system,
        budget,
        structures: structures.len(),
        instances: 0,
        evaluations: 0,
        failures: Vec::new(),
        findings: Vec::new(),
    };
    let mut ids = system_schemas(system);
    // N13 duplicates N12.
    ids.retain(|id| *id != "N13");
    if system == System::Qn4 {
        ids.push("N14");
    }
    for id in ids {
        let s = schema(id).expect("known schema");
        for phi in schema_instances(&s) {
            report.instances += 1;
            let (n, failure) = search_instance(id, &phi, &structures, &budget)?;
            report.evaluations += n;
            if let Some(f) = failure {
                if system == System::Qn4 && id == "N14" {
                    report.findings.push(f);
                } else {
                    report.failures.push(f);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_derivation;

    fn f(s: &str) -> Formula {
        parse_formula(s, &mut Signature::permissive()).unwrap()
    }

    const IDENTITY: &str = "derivation identity system=n4
1: p() -> ((p() -> p()) -> p()) [axiom N1]
2: (p() -> ((p() -> p()) -> p())) -> ((p() -> (p() -> p())) -> (p() -> p())) [axiom N2]
3: (p() -> (p() -> p())) -> (p() -> p()) [mp 1 2]
4: p() -> (p() -> p()) [axiom N1]
5: p() -> p() [mp 4 3]
qed 5
";

    #[test]
    fn n1_bindings() {
        let m = match_schema(&f("p() -> (q() -> p())"), &schema("N1").unwrap()).unwrap();
        assert_eq!(m.bindings["a"], f("p()"));
        assert_eq!(m.bindings["b"], f("q()"));
        let m = match_schema(&f("(p() -> p()) -> (q() -> (p() -> p()))"), &schema("N1").unwrap()).unwrap();
        assert_eq!(m.bindings["a"], f("p() -> p()"));
    }

    #[test]
    fn a2_finds_term() {
        let m = match_schema(&f("(forall x . P(x)) -> P(y)"), &schema("A2").unwrap()).unwrap();
        assert_eq!(m.quantifier.unwrap().2, Term::var("y"));
        let err = match_schema(&f("(forall x . exists y . R(x, y)) -> exists y . R(y, y)"), &schema("A2").unwrap());
        assert!(matches!(err, Err(MatchError::SideConditionViolated(_))));
        assert!(match_schema(&f("(forall x . P(x)) -> Q(y)"), &schema("A2").unwrap()).is_err());
    }

    #[test]
    fn identity_derivation_checks() {
        let d = parse_derivation(IDENTITY).unwrap();
        check_derivation(&d).unwrap();
    }

    #[test]
    fn tampered_line_rejected() {
        let d = parse_derivation(&IDENTITY.replace("3: (p() -> (p() -> p()))", "3: (p() -> (q() -> p()))")).unwrap();
        let err = check_derivation(&d).unwrap_err();
        assert_eq!(err.line(), Some(3));
        assert_eq!(err.to_string(), "error line 3: bad justification");
    }

    #[test]
    fn r4_side_condition() {
        let d = parse_derivation(
            "derivation bad system=n4
1: P(x) -> (Q(x) -> P(x)) [axiom N1]
2: P(x) -> forall x . (Q(x) -> P(x)) [r4 1]
qed 2
",
        )
        .unwrap();
        assert!(matches!(check_derivation(&d), Err(KernelError::RuleSideCondition { line: 2, .. })));
    }

    #[test]
    fn forward_reference_and_open_premise() {
        let d = parse_derivation("derivation fw system=n4\n1: p() [mp 2 3]\nqed 1\n").unwrap();
        assert_eq!(check_derivation(&d), Err(KernelError::ForwardReference { line: 1, target: 2 }));
        let d = parse_derivation("derivation op system=n4\npremise 1: P(x)\n1: P(x) [premise 1]\nqed 1\n").unwrap();
        assert!(matches!(check_derivation(&d), Err(KernelError::OpenPremise { .. })));
    }

    #[test]
    fn n14_only_in_n3() {
        let text = "derivation ex system=n3\n1: ~p() -> (p() -> q()) [axiom N14]\nqed 1\n";
        check_derivation(&parse_derivation(text).unwrap()).unwrap();
        let d = parse_derivation(&text.replace("n3", "n4")).unwrap();
        assert!(matches!(check_derivation(&d), Err(KernelError::BadJustification { line: 1, .. })));
    }

    #[test]
    fn small_audit_is_sound_and_finds_n14() {
        let budget = AuditBudget {
            max_domain: 1,
            max_algebra: 3,
            max_assignments: 100_000,
        };
        let r = audit_soundness(System::Qn4, budget).unwrap();
        assert!(r.sound(), "{:?}", r.failures.first());
        assert!(!r.findings.is_empty());
        let r = audit_soundness(System::Qcw, budget).unwrap();
        assert!(r.sound(), "{:?}", r.failures.first());
    }
}
