//! Bounded-rank validity of the set-theoretic axioms via explicit witness
//! constructions, plus the refutation of unrestricted Comprehension.
//!
//! Each check builds the witness the validity proof uses and verifies the
//! defining equivalence or inequality point by point. Reports carry both
//! readings of validity under non-deterministic negation.

use std::fmt;

use thiserror::Error;

use crate::algebra::Elem;
use crate::lemmas::{check_hat_lemma, hat_formulas};
use crate::syntax::{Formula, Term};
use crate::universe::{enumerate_universe, NameId, Policy};
use crate::valuation::{judge_points, EvalError, Mode, NegationAssignment, Quant, SetModel, Valuation, ASSIGNMENT_CAP};

/// Ceiling on the candidate functions of a Powerset witness.
pub const POWERSET_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    Pairing,
    Union,
    Separation,
    Powerset,
    Extensionality,
    EmptySet,
    Collection,
    Induction,
    Infinity,
    Comprehension,
}

impl AxiomId {
    /// The nine checks that should pass (Infinity as its reflection).
    pub const VALIDATED: [AxiomId; 9] = [
        AxiomId::Pairing,
        AxiomId::Union,
        AxiomId::Separation,
        AxiomId::Powerset,
        AxiomId::Extensionality,
        AxiomId::EmptySet,
        AxiomId::Collection,
        AxiomId::Induction,
        AxiomId::Infinity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxiomId::Pairing => "pairing",
            AxiomId::Union => "union",
            AxiomId::Separation => "separation",
            AxiomId::Powerset => "powerset",
            AxiomId::Extensionality => "extensionality",
            AxiomId::EmptySet => "emptyset",
            AxiomId::Collection => "collection",
            AxiomId::Induction => "induction",
            AxiomId::Infinity => "infinity",
            AxiomId::Comprehension => "comprehension",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AxiomId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AxiomId::VALIDATED
            .iter()
            .chain(&[AxiomId::Comprehension])
            .find(|a| a.as_str() == s || (s == "empty" && **a == AxiomId::EmptySet))
            .copied()
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{axiom} needs a formula with free variables {expected}: {formula}")]
    BadFormula {
        axiom: AxiomId,
        expected: String,
        formula: String,
    },
    #[error("powerset witness needs {count} candidate functions (cap {cap})")]
    PowersetCap { count: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub mode: Mode,
    pub rank_bound: usize,
    pub quant: Quant,
    /// Names built as witnesses (empty when the check needs none).
    pub witnesses: Vec<NameId>,
    /// Number of pointwise conditions checked.
    pub instances: usize,
    /// Verdict under `quant`.
    pub value: Elem,
    pub valid: bool,
    pub value_all: Elem,
    pub valid_all: bool,
    pub valid_some: bool,
    /// Falsifying (under `all`) or satisfying (under `some`) assignment.
    pub assignment: Option<NegationAssignment>,
    pub failure: Option<String>,
    pub notes: Vec<String>,
    /// A closed sentence, with witnesses substituted, whose value must
    /// equal `value_all`. Present when negation is deterministic.
    pub instance: Option<Formula>,
}

impl AxiomReport {
    pub fn result_line(&self) -> String {
        format!(
            "RESULT axiom={} mode={} rank={} quant={} value={} valid={} assignment={}",
            self.axiom,
            self.mode,
            self.rank_bound,
            self.quant.as_str(),
            self.value,
            if self.valid { "yes" } else { "no" },
            self.assignment.as_ref().map_or("none".into(), |a| a.fingerprint())
        )
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axiom:      {}", self.axiom)?;
        writeln!(f, "model:      mode {}, names of rank <= {}", self.mode, self.rank_bound)?;
        let shown: Vec<String> = self.witnesses.iter().take(8).map(|w| w.to_string()).collect();
        let more = if self.witnesses.len() > 8 { ", ..." } else { "" };
        writeln!(f, "witnesses:  {} [{}{more}]", self.witnesses.len(), shown.join(", "))?;
        writeln!(f, "instances:  {}", self.instances)?;
        writeln!(
            f,
            "all:        value {} valid {}",
            self.value_all,
            if self.valid_all { "yes" } else { "no" }
        )?;
        writeln!(f, "some:       valid {}", if self.valid_some { "yes" } else { "no" })?;
        writeln!(f, "verdict:    {} under {} assignments", if self.valid { "valid" } else { "invalid" }, self.quant.as_str())?;
        if let Some(fail) = &self.failure {
            writeln!(f, "failure:    {fail}")?;
        }
        if let Some(a) = &self.assignment {
            writeln!(f, "assignment: {a}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

fn name(id: NameId) -> Term {
    Term::Name(id)
}

fn var(x: &str) -> Term {
    Term::var(x)
}

fn deterministic(model: &SetModel) -> bool {
    matches!(model.mode, Mode::Boolean | Mode::Heyting)
}

fn conj(parts: Vec<Formula>) -> Option<Formula> {
    parts.into_iter().reduce(Formula::and)
}

fn iff(model: &SetModel, a: Elem, b: Elem) -> Elem {
    model.algebra.iff(a, b)
}

fn eval_closed(val: &mut Valuation, phi: &Formula) -> Result<Elem, EvalError> {
    val.eval(phi, &mut Vec::new())
}

struct Pending<P> {
    axiom: AxiomId,
    points: Vec<(String, P)>,
    witnesses: Vec<NameId>,
    instance: Vec<Formula>,
    notes: Vec<String>,
}

impl<P> Pending<P> {
    fn new(axiom: AxiomId) -> Self {
        Pending {
            axiom,
            points: Vec::new(),
            witnesses: Vec::new(),
            instance: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn judge(
        self,
        model: &mut SetModel,
        quant: Quant,
        mut run: impl FnMut(&mut Valuation, &P) -> Result<Elem, EvalError>,
    ) -> Result<AxiomReport, AxiomError> {
        let payloads: Vec<&P> = self.points.iter().map(|(_, p)| p).collect();
        let j = judge_points(model, &payloads, ASSIGNMENT_CAP, |val, p| run(val, p))?;
        let top = model.algebra.top();
        let (value, valid, assignment) = match quant {
            Quant::All => (j.all_value, j.all_valid, j.falsifier.as_ref().map(|(_, a, _)| a.clone())),
            Quant::Some => (if j.some_valid { top } else { j.some_bound }, j.some_valid, j.satisfier.clone()),
        };
        let failure = match quant {
            Quant::All => j
                .falsifier
                .as_ref()
                .map(|(i, _, v)| format!("{} has value {v}", self.points[*i].0)),
            Quant::Some if !j.some_valid => Some("no single assignment satisfies every instance".into()),
            Quant::Some => None,
        };
        let mut notes = self.notes;
        notes.push(format!(
            "rank-relative: quantifiers range over {} names of rank <= {}",
            model.scope.len(),
            model.rank_bound
        ));
        Ok(AxiomReport {
            axiom: self.axiom,
            mode: model.mode,
            rank_bound: model.rank_bound,
            quant,
            witnesses: self.witnesses,
            instances: self.points.len(),
            value,
            valid,
            value_all: j.all_value,
            valid_all: j.all_valid,
            valid_some: j.some_valid,
            assignment,
            failure,
            notes,
            instance: if deterministic(model) { conj(self.instance) } else { None },
        })
    }
}

/// `w = {⟨u, top⟩, ⟨v, top⟩}` and `||z ∈ w|| = ||z ≈ u|| ∨ ||z ≈ v||` for
/// every `z` in scope.
pub fn check_pairing(model: &mut SetModel, pairs: &[(NameId, NameId)], quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Pairing);
    let top = model.algebra.top();
    for &(u, v) in pairs {
        let w = model.mk_name(&[(u, top), (v, top)])?;
        p.witnesses.push(w);
        p.instance.push(Formula::forall(
            "z",
            Formula::iff(
                Formula::mem(var("z"), name(w)),
                Formula::or(Formula::eq(var("z"), name(u)), Formula::eq(var("z"), name(v))),
            ),
        ));
        for &z in &model.scope {
            p.points.push((format!("z={z} u={u} v={v} w={w}"), (z, u, v, w)));
        }
    }
    p.judge(model, quant, |val, &(z, u, v, w)| {
        let m = &mut *val.model;
        let lhs = m.mem(z, w);
        let (a, b) = (m.eq(z, u), m.eq(z, v));
        let rhs = m.algebra.join(a, b);
        Ok(iff(m, lhs, rhs))
    })
}

/// `dom(w) = ⋃_{v∈dom u} dom(v)`, `w(x) = ⋁_{v∈dom u} u(v) ∧ v(x)`, and
/// `||z ∈ w|| = ||∃y (y ∈ u ∧ z ∈ y)||` for every `z` in scope.
pub fn check_union(model: &mut SetModel, sets: &[NameId], quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Union);
    for &u in sets {
        let mut entries: Vec<(NameId, Elem)> = Vec::new();
        for &(v, uv) in model.store.entries(u) {
            for &(x, vx) in model.store.entries(v) {
                let e = model.algebra.meet(uv, vx);
                match entries.iter_mut().find(|(y, _)| *y == x) {
                    Some((_, acc)) => *acc = model.algebra.join(*acc, e),
                    None => entries.push((x, e)),
                }
            }
        }
        let w = model.mk_name(&entries)?;
        p.witnesses.push(w);
        let rhs = |z: Term| Formula::exists("y", Formula::and(Formula::mem(var("y"), name(u)), Formula::mem(z, var("y"))));
        p.instance.push(Formula::forall("z", Formula::iff(Formula::mem(var("z"), name(w)), rhs(var("z")))));
        for &z in &model.scope {
            p.points.push((format!("z={z} u={u} w={w}"), (z, w, rhs(name(z)))));
        }
    }
    p.judge(model, quant, |val, (z, w, rhs)| {
        let lhs = val.model.mem(*z, *w);
        let r = eval_closed(val, rhs)?;
        Ok(iff(val.model, lhs, r))
    })
}

fn one_free(axiom: AxiomId, phi: &Formula, expected: &[&str]) -> Result<(), AxiomError> {
    let fv = phi.free_vars();
    if fv.iter().any(|x| !expected.contains(&x.as_str())) || fv.is_empty() {
        return Err(AxiomError::BadFormula {
            axiom,
            expected: expected.join(", "),
            formula: phi.to_string(),
        });
    }
    Ok(())
}

/// `dom(w) = dom(u)`, `w(x) = ||x ∈ u|| ∧ ||φ(x)||` (under the current
/// negation choices) and `||z ∈ w|| = ||z ∈ u ∧ φ(z)||` for `z` in scope.
pub fn check_separation(
    model: &mut SetModel,
    sets: &[NameId],
    formulas: &[Formula],
    quant: Quant,
) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Separation);
    for phi in formulas {
        one_free(AxiomId::Separation, phi, &["x"])?;
        if phi.has_negation() && !deterministic(model) {
            p.notes.push(format!("{phi}: the witness is rebuilt under each negation assignment"));
        }
        for &u in sets {
            if deterministic(model) || !phi.has_negation() {
                let w = separation_witness(model, u, phi, &mut |m, f| {
                    crate::valuation::eval_sentence(f, m, &NegationAssignment::default())
                })?;
                p.witnesses.push(w);
                p.instance.push(separation_instance(u, w, phi));
            }
            for &z in &model.scope {
                p.points.push((format!("z={z} u={u} φ={phi}"), (z, u, phi.clone())));
            }
        }
    }
    p.judge(model, quant, |val, (z, u, phi)| {
        let w = separation_witness_in(val, *u, phi)?;
        let lhs = val.model.mem(*z, w);
        let mz = val.model.mem(*z, *u);
        let fz = eval_closed(val, &phi.instantiate("x", *z))?;
        let rhs = val.model.algebra.meet(mz, fz);
        Ok(iff(val.model, lhs, rhs))
    })
}

fn separation_instance(u: NameId, w: NameId, phi: &Formula) -> Formula {
    // ∀z (z ∈ w ↔ z ∈ u ∧ φ(z)), renaming x to a fresh z.
    let body = crate::syntax::substitute(phi, "x", &var("z_sep")).unwrap_or_else(|_| phi.clone());
    Formula::forall(
        "z_sep",
        Formula::iff(
            Formula::mem(var("z_sep"), name(w)),
            Formula::and(Formula::mem(var("z_sep"), name(u)), body),
        ),
    )
}

fn separation_witness(
    model: &mut SetModel,
    u: NameId,
    phi: &Formula,
    eval: &mut dyn FnMut(&mut SetModel, &Formula) -> Result<Elem, EvalError>,
) -> Result<NameId, EvalError> {
    let mut entries = Vec::new();
    for x in model.store.domain(u).collect::<Vec<_>>() {
        let m = model.mem(x, u);
        let f = eval(model, &phi.instantiate("x", x))?;
        entries.push((x, model.algebra.meet(m, f)));
    }
    model.mk_name(&entries)
}

fn separation_witness_in(val: &mut Valuation, u: NameId, phi: &Formula) -> Result<NameId, EvalError> {
    let mut entries = Vec::new();
    for x in val.model.store.domain(u).collect::<Vec<_>>() {
        let m = val.model.mem(x, u);
        let f = eval_closed(val, &phi.instantiate("x", x))?;
        entries.push((x, val.model.algebra.meet(m, f)));
    }
    val.model.mk_name(&entries)
}

/// `dom(w)` is every function `f: dom(u) → A` (as a name) with
/// `w(f) = ||f ⊆ u||`; checks `||v ∈ w|| = ||∀y (y ∈ v → y ∈ u)||` for `v`
/// in scope.
pub fn check_powerset(model: &mut SetModel, sets: &[NameId], quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Powerset);
    let size = model.algebra.size();
    for &u in sets {
        let dom: Vec<NameId> = model.store.domain(u).collect();
        let count = size
            .checked_pow(dom.len() as u32)
            .filter(|&c| c <= POWERSET_CAP)
            .ok_or(AxiomError::PowersetCap {
                count: size.saturating_pow(dom.len() as u32),
                cap: POWERSET_CAP,
            })?;
        let mut entries = Vec::with_capacity(count);
        for mut i in 0..count {
            let f_entries: Vec<(NameId, Elem)> = dom
                .iter()
                .map(|&x| {
                    let e = i % size;
                    i /= size;
                    (x, e)
                })
                .collect();
            let f = model.mk_name(&f_entries)?;
            // ||f ⊆ u|| = ⋀_{x∈dom f} f(x) → ||x ∈ u||
            let mut sub = model.algebra.top();
            for (x, fx) in f_entries {
                let m = model.mem(x, u);
                sub = model.algebra.meet(sub, model.algebra.imp(fx, m));
            }
            entries.push((f, sub));
        }
        let w = model.mk_name(&entries)?;
        p.witnesses.push(w);
        let subset = |z: Term| Formula::forall("y", Formula::imp(Formula::mem(var("y"), z), Formula::mem(var("y"), name(u))));
        p.instance.push(Formula::forall("z", Formula::iff(Formula::mem(var("z"), name(w)), subset(var("z")))));
        for &v in &model.scope {
            p.points.push((format!("v={v} u={u} w={w}"), (v, w, subset(name(v)))));
        }
    }
    p.notes.push("witness values w(f) = ||f ⊆ u||".into());
    p.judge(model, quant, |val, (v, w, rhs)| {
        let lhs = val.model.mem(*v, *w);
        let r = eval_closed(val, rhs)?;
        Ok(iff(val.model, lhs, r))
    })
}

/// `||∀z (z ∈ x ↔ z ∈ y)|| ≤ ||x ≈ y||` for all `x, y` in scope.
pub fn check_extensionality(model: &mut SetModel, quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Extensionality);
    let same = |a: Term, b: Term| {
        Formula::forall(
            "z",
            Formula::iff(Formula::mem(var("z"), a), Formula::mem(var("z"), b)),
        )
    };
    p.instance.push(Formula::forall(
        "x",
        Formula::forall("y", Formula::imp(same(var("x"), var("y")), Formula::eq(var("x"), var("y")))),
    ));
    for &x in &model.scope {
        for &y in &model.scope {
            p.points.push((format!("x={x} y={y}"), (x, y, same(name(x), name(y)))));
        }
    }
    p.judge(model, quant, |val, (x, y, same)| {
        let a = eval_closed(val, same)?;
        let e = val.model.eq(*x, *y);
        Ok(val.model.algebra.imp(a, e))
    })
}

/// For each `u` in scope and each admissible value `n′` of `~(u ≈ u)`,
/// builds `w = {⟨u, n′⟩}` and checks `||u ∈ w|| = n′ = ||~(u ≈ u)||`.
pub fn check_emptyset(model: &mut SetModel, sets: &[NameId], quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::EmptySet);
    let top = model.algebra.top();
    for &u in sets {
        let not_self = Formula::neg(Formula::eq(name(u), name(u)));
        for n in model.neg_domain(top) {
            let w = model.mk_name(&[(u, n)])?;
            p.witnesses.push(w);
        }
        if deterministic(model) {
            let n = model.algebra.pseudo_complement(top);
            let w = model.mk_name(&[(u, n)])?;
            p.instance.push(Formula::iff(Formula::mem(name(u), name(w)), not_self.clone()));
        }
        p.points.push((format!("u={u}"), (u, not_self)));
    }
    p.notes.push("each witness is checked at its own element z = u".into());
    p.judge(model, quant, |val, (u, not_self)| {
        let n = eval_closed(val, not_self)?;
        let w = val.model.mk_name(&[(*u, n)])?;
        let m = val.model.mem(*u, w);
        Ok(iff(val.model, m, n))
    })
}

/// With `v` the name over the whole scope with constant value top, checks
/// `||∀x (x ∈ u → ∃y φ(x,y))|| ≤ ||∀x (x ∈ u → ∃y (y ∈ v ∧ φ(x,y)))||`.
pub fn check_collection(
    model: &mut SetModel,
    sets: &[NameId],
    formulas: &[Formula],
    quant: Quant,
) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Collection);
    let top = model.algebra.top();
    let entries: Vec<(NameId, Elem)> = model.scope.iter().map(|&x| (x, top)).collect();
    let v = model.mk_name(&entries)?;
    p.witnesses.push(v);
    p.notes.push(format!("collecting set: all {} names in scope with value top", model.scope.len()));
    for phi in formulas {
        one_free(AxiomId::Collection, phi, &["x", "y"])?;
        for &u in sets {
            let lhs = Formula::forall("x", Formula::imp(Formula::mem(var("x"), name(u)), Formula::exists("y", phi.clone())));
            let rhs = Formula::forall(
                "x",
                Formula::imp(
                    Formula::mem(var("x"), name(u)),
                    Formula::exists("y", Formula::and(Formula::mem(var("y"), name(v)), phi.clone())),
                ),
            );
            let sentence = Formula::imp(lhs, rhs);
            p.instance.push(sentence.clone());
            p.points.push((format!("u={u} φ={phi}"), sentence));
        }
    }
    p.judge(model, quant, eval_closed)
}

/// `∀x[(∀y (y ∈ x → φ(y))) → φ(x)] → ∀x φ(x)` at the model's scope.
pub fn check_induction(model: &mut SetModel, formulas: &[Formula], quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut p = Pending::new(AxiomId::Induction);
    for phi in formulas {
        one_free(AxiomId::Induction, phi, &["x"])?;
        let phi_y = crate::syntax::substitute(phi, "x", &var("y_ind")).map_err(|e| AxiomError::BadFormula {
            axiom: AxiomId::Induction,
            expected: "x".into(),
            formula: e.to_string(),
        })?;
        let hyp = Formula::forall(
            "x",
            Formula::imp(
                Formula::forall("y_ind", Formula::imp(Formula::mem(var("y_ind"), var("x")), phi_y)),
                phi.clone(),
            ),
        );
        let sentence = Formula::imp(hyp, Formula::forall("x", phi.clone()));
        p.instance.push(sentence.clone());
        p.points.push((format!("φ={phi}"), sentence));
    }
    p.judge(model, quant, eval_closed)
}

/// Transfer of restricted negation-free formulas, including the Infinity
/// matrix `∅ ∈ x ∧ ∀y∈x (y⁺ ∈ x)`, between hereditarily finite sets of
/// rank ≤ 3 and their hats. Infinity itself needs an infinite set and is
/// not checked.
pub fn check_infinity_reflection(model: &mut SetModel, quant: Quant) -> Result<AxiomReport, AxiomError> {
    let mut shadow = model.clone();
    if !deterministic(&shadow) {
        // Negation-free formulas have the same value in every mode.
        shadow.structure = None;
        shadow.mode = if shadow.algebra.is_boolean() { Mode::Boolean } else { Mode::Heyting };
    }
    let r = check_hat_lemma(&mut shadow, 3, &hat_formulas())?;
    let top = model.algebra.top();
    let value = if r.holds() { top } else { model.algebra.bottom() };
    Ok(AxiomReport {
        axiom: AxiomId::Infinity,
        mode: model.mode,
        rank_bound: model.rank_bound,
        quant,
        witnesses: Vec::new(),
        instances: r.checked,
        value,
        valid: r.holds(),
        value_all: value,
        valid_all: r.holds(),
        valid_some: r.holds(),
        assignment: None,
        failure: r.failures.first().cloned(),
        notes: vec![
            "checks reflection of restricted negation-free formulas on hereditarily finite sets of rank <= 3".into(),
            "the axiom of Infinity itself requires an infinite name and is outside this check".into(),
        ],
        instance: None,
    })
}

/// `||∃x ∀y (y ∈ x)||` with `x` over names of rank ≤ r and `y` over names
/// of rank ≤ r+1, where `r` is the model's rank bound. The refutation
/// succeeds when the value is bottom.
pub fn check_comprehension_refuted(model: &mut SetModel, quant: Quant) -> Result<AxiomReport, AxiomError> {
    let r = model.rank_bound;
    let xs = model.names_up_to(r);
    let policy = if r < 2 {
        Policy::Full
    } else {
        Policy::DomainsRestricted {
            max_dom: crate::universe::universe_size(model.algebra.size(), r).unwrap_or(u128::MAX) as usize,
        }
    };
    let ys = enumerate_universe(&mut model.store, &model.algebra.clone(), r + 1, policy).map_err(EvalError::from)?;
    let mut value = model.algebra.bottom();
    let mut failure = None;
    for &x in &xs {
        let mut inner = model.algebra.top();
        for &y in &ys {
            let m = model.mem(y, x);
            inner = model.algebra.meet(inner, m);
            if inner == model.algebra.bottom() {
                break;
            }
        }
        if inner != model.algebra.bottom() && failure.is_none() {
            failure = Some(format!("x={x} contains every y with value {inner}"));
        }
        value = model.algebra.join(value, inner);
    }
    let refuted = value == model.algebra.bottom();
    let mut notes = vec![format!(
        "x ranges over {} names of rank <= {r}, y over {} names of rank <= {}",
        xs.len(),
        ys.len(),
        r + 1
    )];
    if model.algebra.size() == 1 {
        notes.push("degenerate algebra: top = bottom, so the refutation is vacuous".into());
    }
    Ok(AxiomReport {
        axiom: AxiomId::Comprehension,
        mode: model.mode,
        rank_bound: r,
        quant,
        witnesses: Vec::new(),
        instances: xs.len() * ys.len(),
        value,
        valid: refuted,
        value_all: value,
        valid_all: refuted,
        valid_some: refuted,
        assignment: None,
        failure,
        notes,
        instance: None,
    })
}

/// Default one-variable formulas (in `x`) for Separation and Induction.
pub fn default_unary(params: &[NameId]) -> Vec<Formula> {
    let mut out = vec![
        Formula::eq(var("x"), var("x")),
        Formula::exists("y", Formula::mem(var("y"), var("x"))),
        Formula::forall("y", Formula::imp(Formula::mem(var("y"), var("x")), Formula::eq(var("y"), var("y")))),
    ];
    for &c in params {
        out.push(Formula::mem(var("x"), name(c)));
        out.push(Formula::mem(name(c), var("x")));
        out.push(Formula::or(Formula::eq(var("x"), name(c)), Formula::mem(var("x"), name(c))));
    }
    out
}

/// Default two-variable formulas (in `x`, `y`) for Collection.
pub fn default_binary() -> Vec<Formula> {
    vec![
        Formula::eq(var("y"), var("x")),
        Formula::mem(var("x"), var("y")),
        Formula::and(Formula::mem(var("y"), var("x")), Formula::eq(var("y"), var("y"))),
        Formula::forall("z", Formula::imp(Formula::mem(var("z"), var("x")), Formula::mem(var("z"), var("y")))),
    ]
}

/// Names used as formula parameters: the first few names in scope.
fn parameters(model: &SetModel) -> Vec<NameId> {
    model.scope.iter().copied().take(3).collect()
}

/// Runs one axiom check with default parameters over the whole scope,
/// or with `formula` as the schema parameter where the axiom takes one.
pub fn check_axiom(
    model: &mut SetModel,
    axiom: AxiomId,
    quant: Quant,
    formula: Option<&Formula>,
) -> Result<AxiomReport, AxiomError> {
    let scope = model.scope.clone();
    let unary = formula.map_or_else(|| default_unary(&parameters(model)), |f| vec![f.clone()]);
    match axiom {
        AxiomId::Pairing => {
            let pairs: Vec<(NameId, NameId)> = scope.iter().flat_map(|&u| scope.iter().map(move |&v| (u, v))).collect();
            check_pairing(model, &pairs, quant)
        }
        AxiomId::Union => check_union(model, &scope, quant),
        AxiomId::Separation => check_separation(model, &scope, &unary, quant),
        AxiomId::Powerset => check_powerset(model, &scope, quant),
        AxiomId::Extensionality => check_extensionality(model, quant),
        AxiomId::EmptySet => check_emptyset(model, &scope, quant),
        AxiomId::Collection => {
            let binary = formula.map_or_else(default_binary, |f| vec![f.clone()]);
            check_collection(model, &scope, &binary, quant)
        }
        AxiomId::Induction => check_induction(model, &unary, quant),
        AxiomId::Infinity => check_infinity_reflection(model, quant),
        AxiomId::Comprehension => check_comprehension_refuted(model, quant),
    }
}

/// The nine validity checks followed by the Comprehension refutation.
pub fn check_all(model: &mut SetModel, quant: Quant) -> Result<Vec<AxiomReport>, AxiomError> {
    AxiomId::VALIDATED
        .iter()
        .chain(&[AxiomId::Comprehension])
        .map(|&a| check_axiom(model, a, quant, None))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HeytingAlgebra;
    use crate::fidel::{saturate, Kind};
    use crate::valuation::eval_sentence;

    fn boolean(rank: usize) -> SetModel {
        SetModel::boolean(HeytingAlgebra::chain(2), rank, Policy::Full).unwrap()
    }

    #[test]
    fn pairing_of_empty_with_itself() {
        let mut m = boolean(2);
        let r = check_pairing(&mut m, &[(NameId::EMPTY, NameId::EMPTY)], Quant::All).unwrap();
        assert!(r.valid);
        assert_eq!(m.store.entries(r.witnesses[0]), &[(NameId::EMPTY, 1)]);
    }

    #[test]
    fn union_of_empty_is_empty() {
        let mut m = boolean(2);
        let r = check_union(&mut m, &[NameId::EMPTY], Quant::All).unwrap();
        assert_eq!(r.witnesses, vec![NameId::EMPTY]);
        assert!(r.valid);
    }

    #[test]
    fn powerset_of_empty() {
        let mut m = boolean(2);
        let r = check_powerset(&mut m, &[NameId::EMPTY], Quant::All).unwrap();
        assert_eq!(m.store.entries(r.witnesses[0]), &[(NameId::EMPTY, 1)]);
        assert!(r.valid);
    }

    #[test]
    fn emptyset_choices_in_saturated_boolean() {
        let mut m = SetModel::with_structure(saturate(&HeytingAlgebra::chain(2), Kind::N4), 2, Policy::Full).unwrap();
        let r = check_emptyset(&mut m, &[NameId::EMPTY], Quant::All).unwrap();
        assert_eq!(r.witnesses.len(), 2);
        assert!(r.valid_all && r.valid_some);
    }

    #[test]
    fn comprehension_refuted_at_rank_one() {
        for h in [HeytingAlgebra::chain(2), HeytingAlgebra::chain(3)] {
            let mut m = SetModel::heyting(h, 1, Policy::Full).unwrap();
            let r = check_comprehension_refuted(&mut m, Quant::All).unwrap();
            assert_eq!(r.value, 0);
            assert!(r.valid);
        }
    }

    #[test]
    fn boolean_baseline_and_self_consistency() {
        let mut m = boolean(2);
        for r in check_all(&mut m, Quant::All).unwrap() {
            assert!(r.valid, "{r}");
            if let Some(s) = &r.instance {
                assert_eq!(eval_sentence(s, &mut m, &NegationAssignment::default()).unwrap(), r.value_all, "{}", r.axiom);
            }
        }
    }

    #[test]
    fn separation_with_negated_formula_reports_both_readings() {
        let mut m = SetModel::with_structure(saturate(&HeytingAlgebra::chain(3), Kind::N4), 2, Policy::Full).unwrap();
        let phi = Formula::neg(Formula::eq(var("x"), name(NameId::EMPTY)));
        let scope = m.scope.clone();
        let r = check_separation(&mut m, &scope, &[phi], Quant::Some).unwrap();
        assert!(r.instances > 0);
        assert_eq!(r.valid, r.valid_some);
    }

    #[test]
    fn bad_formula_rejected() {
        let mut m = boolean(1);
        let phi = Formula::mem(var("q"), var("q"));
        assert!(matches!(
            check_separation(&mut m, &[NameId::EMPTY], &[phi], Quant::All),
            Err(AxiomError::BadFormula { .. })
        ));
    }
}
