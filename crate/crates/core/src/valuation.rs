//! Truth values of set-theoretic sentences in algebra-valued models.
//!
//! Negation depends on the mode: pseudo-complement in Boolean and Heyting
//! models, a non-deterministic choice from `N_x` in F-structure models.
//! Choices are made per closed negated formula (the same sentence always
//! gets the same value within one assignment) and are enumerated by
//! re-running evaluation: whenever an unassigned choice is met the run
//! stops, and one branch per admissible value is queued.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{Elem, HeytingAlgebra};
use crate::fidel::{FStructure, Kind};
use crate::syntax::{Atom, Formula, Term};
use crate::universe::{enumerate_universe, NameId, NameStore, Policy, UniverseError};

/// Default ceiling on the outcomes one exploration may produce.
pub const ASSIGNMENT_CAP: usize = 100_000;
/// Ceiling on the points a sentence is split into.
pub const POINT_CAP: usize = 2_000_000;
/// Ceiling on search nodes when looking for one assignment satisfying all points.
pub const CSP_NODE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Boolean,
    Heyting,
    Comega,
    N4,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Boolean => "boolean",
            Mode::Heyting => "heyting",
            Mode::Comega => "comega",
            Mode::N4 => "n4",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "boolean" => Ok(Mode::Boolean),
            "heyting" => Ok(Mode::Heyting),
            "comega" | "cw" => Ok(Mode::Comega),
            "n4" => Ok(Mode::N4),
            _ => Err(format!("unknown mode `{s}` (expected boolean, heyting, comega or n4)")),
        }
    }
}

/// How validity quantifies over negation assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    All,
    Some,
}

impl Quant {
    pub fn as_str(self) -> &'static str {
        match self {
            Quant::All => "all",
            Quant::Some => "some",
        }
    }
}

impl std::str::FromStr for Quant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" | "all_assignments" => Ok(Quant::All),
            "some" | "some_assignment" => Ok(Quant::Some),
            _ => Err(format!("unknown quantification `{s}` (expected all or some)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// Internal signal: evaluation met an unassigned choice.
    #[error("evaluation needs a negation choice")]
    Pending,
    #[error("no negation value assigned to {0}")]
    UncoveredNegation(String),
    #[error("value {value} is not admissible for {key}")]
    InadmissibleChoice { key: String, value: Elem },
    #[error("negation over a quantifier: {0}")]
    NegOverQuantifier(String),
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("unknown name {0}")]
    UnknownName(NameId),
    #[error("atom not interpreted in this model: {0}")]
    UnsupportedAtom(String),
    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: String, cap: usize },
    #[error("formula is not restricted: {0}")]
    NotRestricted(String),
    #[error("formula contains negation: {0}")]
    NotNegationFree(String),
    #[error("formula must have exactly one free variable: {0}")]
    WrongFreeVariables(String),
    #[error("algebra is not refinable")]
    NotRefinable,
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("ill-formed structure: {0}")]
    BadStructure(String),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

// ---------------------------------------------------------------------------
// Choices

/// Partial resolution of non-deterministic values, keyed by `K`.
#[derive(Debug, Clone)]
pub struct Choices<K> {
    pub assigned: BTreeMap<K, Elem>,
    pending: Option<(K, Vec<Elem>)>,
    strict: bool,
}

impl<K: Ord + Clone + fmt::Display> Choices<K> {
    pub fn new(assigned: BTreeMap<K, Elem>) -> Self {
        Choices {
            assigned,
            pending: None,
            strict: false,
        }
    }

    /// Choices that report missing keys instead of branching.
    pub fn strict(assigned: BTreeMap<K, Elem>) -> Self {
        Choices {
            assigned,
            pending: None,
            strict: true,
        }
    }

    pub fn choose(&mut self, key: K, domain: Vec<Elem>) -> Result<Elem, EvalError> {
        match self.assigned.get(&key) {
            Some(&v) if domain.contains(&v) => Ok(v),
            Some(&v) => Err(EvalError::InadmissibleChoice {
                key: key.to_string(),
                value: v,
            }),
            None if self.strict => Err(EvalError::UncoveredNegation(key.to_string())),
            None => {
                self.pending = Some((key, domain));
                Err(EvalError::Pending)
            }
        }
    }
}

/// Runs `run` under every admissible resolution of the choices it meets,
/// in lexicographic order. Each outcome carries exactly the choices used.
pub fn explore<K, T>(
    cap: usize,
    mut run: impl FnMut(&mut Choices<K>) -> Result<T, EvalError>,
) -> Result<Vec<(BTreeMap<K, Elem>, T)>, EvalError>
where
    K: Ord + Clone + fmt::Display,
{
    let mut stack = vec![BTreeMap::new()];
    let mut out = Vec::new();
    let mut runs = 0usize;
    while let Some(partial) = stack.pop() {
        runs += 1;
        if runs > cap.saturating_mul(8) {
            return Err(EvalError::CapExceeded {
                what: "negation branches".into(),
                cap: cap.saturating_mul(8),
            });
        }
        let mut ch = Choices::new(partial);
        match run(&mut ch) {
            Ok(t) => {
                out.push((ch.assigned, t));
                if out.len() > cap {
                    return Err(EvalError::CapExceeded {
                        what: "negation assignments".into(),
                        cap,
                    });
                }
            }
            Err(EvalError::Pending) => {
                let (key, domain) = ch.pending.take().expect("pending choice recorded");
                for &d in domain.iter().rev() {
                    let mut next = ch.assigned.clone();
                    next.insert(key.clone(), d);
                    stack.push(next);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Finds one assignment under which every point has one of its listed
/// local outcomes. Points are tried fewest-options first.
pub fn solve_some<K: Ord + Clone>(
    points: &[Vec<BTreeMap<K, Elem>>],
) -> Result<Option<BTreeMap<K, Elem>>, EvalError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i].len());
    if order.first().is_some_and(|&i| points[i].is_empty()) {
        return Ok(None);
    }
    fn consistent<K: Ord>(cur: &BTreeMap<K, Elem>, opt: &BTreeMap<K, Elem>) -> bool {
        opt.iter().all(|(k, v)| cur.get(k).is_none_or(|w| w == v))
    }
    fn go<K: Ord + Clone>(
        points: &[Vec<BTreeMap<K, Elem>>],
        order: &[usize],
        cur: &mut BTreeMap<K, Elem>,
        nodes: &mut usize,
    ) -> Result<bool, EvalError> {
        let Some((&first, rest)) = order.split_first() else {
            return Ok(true);
        };
        for opt in &points[first] {
            *nodes += 1;
            if *nodes > CSP_NODE_CAP {
                return Err(EvalError::CapExceeded {
                    what: "assignment search nodes".into(),
                    cap: CSP_NODE_CAP,
                });
            }
            if !consistent(cur, opt) {
                continue;
            }
            let added: Vec<K> = opt.keys().filter(|k| !cur.contains_key(*k)).cloned().collect();
            for k in &added {
                cur.insert(k.clone(), opt[k]);
            }
            if go(points, rest, cur, nodes)? {
                return Ok(true);
            }
            for k in &added {
                cur.remove(k);
            }
        }
        Ok(false)
    }
    let mut cur = BTreeMap::new();
    let mut nodes = 0;
    Ok(go(points, &order, &mut cur, &mut nodes)?.then_some(cur))
}

/// A concrete resolution of `||~a|| ∈ N_{||a||}`, keyed by the closed
/// negated sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NegationAssignment(pub BTreeMap<Formula, Elem>);

impl NegationAssignment {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stable 16-hex-digit digest of the entries, or `none`.
    pub fn fingerprint(&self) -> String {
        if self.0.is_empty() {
            return "none".into();
        }
        let mut h = Sha256::new();
        for (k, v) in &self.0 {
            h.update(format!("{k}={v};").as_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for NegationAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k} := {v}")).collect();
        write!(f, "{{{}}}", parts.join("; "))
    }
}

// ---------------------------------------------------------------------------
// Models

/// An algebra-valued model truncated to names of bounded rank.
#[derive(Debug, Clone)]
pub struct SetModel {
    pub algebra: HeytingAlgebra,
    pub structure: Option<FStructure>,
    pub store: NameStore,
    pub mode: Mode,
    pub rank_bound: usize,
    /// Names that unbounded quantifiers range over.
    pub scope: Vec<NameId>,
    /// Evaluate `forall x . x in u -> ...` and `exists x . x in u & ...`
    /// over `dom(u)` instead of the scope.
    pub bounded_opt: bool,
    eq_memo: HashMap<(NameId, NameId), Elem>,
    mem_memo: HashMap<(NameId, NameId), Elem>,
}

impl SetModel {
    fn build(
        algebra: HeytingAlgebra,
        structure: Option<FStructure>,
        mode: Mode,
        rank_bound: usize,
        policy: Policy,
    ) -> Result<Self, EvalError> {
        let mut store = NameStore::new();
        let scope = enumerate_universe(&mut store, &algebra, rank_bound, policy)?;
        Ok(SetModel {
            algebra,
            structure,
            store,
            mode,
            rank_bound,
            scope,
            bounded_opt: false,
            eq_memo: HashMap::new(),
            mem_memo: HashMap::new(),
        })
    }

    /// Boolean mode if the algebra is Boolean, Heyting mode otherwise.
    pub fn heyting(algebra: HeytingAlgebra, rank_bound: usize, policy: Policy) -> Result<Self, EvalError> {
        let mode = if algebra.is_boolean() { Mode::Boolean } else { Mode::Heyting };
        Self::build(algebra, None, mode, rank_bound, policy)
    }

    pub fn boolean(algebra: HeytingAlgebra, rank_bound: usize, policy: Policy) -> Result<Self, EvalError> {
        if !algebra.is_boolean() {
            return Err(EvalError::ModeMismatch("boolean mode needs a Boolean algebra".into()));
        }
        Self::build(algebra, None, Mode::Boolean, rank_bound, policy)
    }

    /// C_ω or N4 mode, following the structure's kind.
    pub fn with_structure(structure: FStructure, rank_bound: usize, policy: Policy) -> Result<Self, EvalError> {
        let mode = match structure.kind() {
            Kind::Comega => Mode::Comega,
            Kind::N4 => Mode::N4,
        };
        Self::build(structure.algebra().clone(), Some(structure), mode, rank_bound, policy)
    }

    /// Switches mode, checking it fits the model.
    pub fn set_mode(&mut self, mode: Mode) -> Result<(), EvalError> {
        match mode {
            Mode::Boolean if !self.algebra.is_boolean() => {
                return Err(EvalError::ModeMismatch("boolean mode needs a Boolean algebra".into()))
            }
            Mode::Comega | Mode::N4 if self.structure.is_none() => {
                return Err(EvalError::ModeMismatch(format!("{mode} mode needs an F-structure")))
            }
            _ => {}
        }
        self.mode = mode;
        Ok(())
    }

    /// Restricts unbounded quantifiers to the given names.
    pub fn set_scope(&mut self, scope: Vec<NameId>) -> Result<(), EvalError> {
        if let Some(&bad) = scope.iter().find(|id| !self.store.contains(**id)) {
            return Err(EvalError::UnknownName(bad));
        }
        self.scope = scope;
        Ok(())
    }

    /// Names in scope of rank at most `r`.
    pub fn names_up_to(&self, r: usize) -> Vec<NameId> {
        self.scope.iter().copied().filter(|&u| self.store.rank(u) <= r).collect()
    }

    pub fn mk_name(&mut self, entries: &[(NameId, Elem)]) -> Result<NameId, EvalError> {
        Ok(self.store.mk_name(entries)?)
    }

    /// Admissible negation values for an argument of value `x`.
    pub fn neg_domain(&self, x: Elem) -> Vec<Elem> {
        match &self.structure {
            Some(s) => s.negs(x).to_vec(),
            None => vec![self.algebra.pseudo_complement(x)],
        }
    }

    /// `||u ∈ v|| = ⋁_{x ∈ dom v} v(x) ∧ ||x ≈ u||`
    pub fn mem(&mut self, u: NameId, v: NameId) -> Elem {
        if let Some(&r) = self.mem_memo.get(&(u, v)) {
            return r;
        }
        let entries = self.store.entries(v).to_vec();
        let mut acc = self.algebra.bottom();
        for (x, vx) in entries {
            if self.algebra.leq(vx, acc) {
                continue;
            }
            let e = self.eq(x, u);
            acc = self.algebra.join(acc, self.algebra.meet(vx, e));
        }
        self.mem_memo.insert((u, v), acc);
        acc
    }

    /// `||u ≈ v|| = ⋀_{x ∈ dom u} (u(x) → ||x ∈ v||) ∧ ⋀_{x ∈ dom v} (v(x) → ||x ∈ u||)`
    pub fn eq(&mut self, u: NameId, v: NameId) -> Elem {
        if let Some(&r) = self.eq_memo.get(&(u, v)) {
            return r;
        }
        let mut acc = self.algebra.top();
        for (a, b) in [(u, v), (v, u)] {
            let entries = self.store.entries(a).to_vec();
            for (x, ax) in entries {
                let m = self.mem(x, b);
                acc = self.algebra.meet(acc, self.algebra.imp(ax, m));
            }
        }
        self.eq_memo.insert((u, v), acc);
        acc
    }

    pub fn clear_memo(&mut self) {
        self.eq_memo.clear();
        self.mem_memo.clear();
    }

    /// The mixture `Σ a_i·u_i`: domain `⋃ dom(u_i)`, value
    /// `x ↦ ⋁_i a_i ∧ ||x ∈ u_i||`.
    pub fn mixture(&mut self, parts: &[(Elem, NameId)]) -> Result<NameId, EvalError> {
        let mut dom: Vec<NameId> = parts.iter().flat_map(|&(_, u)| self.store.domain(u).collect::<Vec<_>>()).collect();
        dom.sort();
        dom.dedup();
        let mut entries = Vec::with_capacity(dom.len());
        for x in dom {
            let mut v = self.algebra.bottom();
            for &(a, u) in parts {
                let m = self.mem(x, u);
                v = self.algebra.join(v, self.algebra.meet(a, m));
            }
            entries.push((x, v));
        }
        self.mk_name(&entries)
    }
}

/// `||u ∈ v||` in `model`.
pub fn eval_mem(u: NameId, v: NameId, model: &mut SetModel) -> Elem {
    model.mem(u, v)
}

/// `||u ≈ v||` in `model`.
pub fn eval_eq(u: NameId, v: NameId, model: &mut SetModel) -> Elem {
    model.eq(u, v)
}

/// `||u ∈ v||` straight from the recursion, without memoisation.
pub fn mem_uncached(store: &NameStore, h: &HeytingAlgebra, u: NameId, v: NameId) -> Elem {
    h.join_all(store.entries(v).iter().map(|&(x, vx)| h.meet(vx, eq_uncached(store, h, x, u))))
}

/// `||u ≈ v||` straight from the recursion, without memoisation.
pub fn eq_uncached(store: &NameStore, h: &HeytingAlgebra, u: NameId, v: NameId) -> Elem {
    let left = store.entries(u).iter().map(|&(x, ux)| h.imp(ux, mem_uncached(store, h, x, v)));
    let right = store.entries(v).iter().map(|&(x, vx)| h.imp(vx, mem_uncached(store, h, x, u)));
    h.meet_all(left.chain(right))
}

// ---------------------------------------------------------------------------
// Evaluation

/// One evaluation context: a model plus the current negation choices.
pub struct Valuation<'m, 'c> {
    pub model: &'m mut SetModel,
    pub choices: &'c mut Choices<Formula>,
}

type Env = Vec<(String, NameId)>;

/// Replaces the variables bound in `env` by their names, innermost first.
pub fn close(phi: &Formula, env: &Env) -> Formula {
    env.iter()
        .rev()
        .fold(phi.clone(), |acc, (x, id)| acc.instantiate(x, *id))
}

impl Valuation<'_, '_> {
    fn term(&self, t: &Term, env: &Env) -> Result<NameId, EvalError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, id)| *id)
                .ok_or_else(|| EvalError::FreeVariable(x.clone())),
            Term::Name(id) if self.model.store.contains(*id) => Ok(*id),
            Term::Name(id) => Err(EvalError::UnknownName(*id)),
            Term::App(..) => Err(EvalError::UnsupportedAtom(t.to_string())),
        }
    }

    fn atom(&mut self, a: &Atom, env: &Env) -> Result<Elem, EvalError> {
        match a {
            Atom::Mem(s, t) => {
                let (u, v) = (self.term(s, env)?, self.term(t, env)?);
                Ok(self.model.mem(u, v))
            }
            Atom::Eq(s, t) => {
                let (u, v) = (self.term(s, env)?, self.term(t, env)?);
                Ok(self.model.eq(u, v))
            }
            Atom::Pred(..) => Err(EvalError::UnsupportedAtom(a.to_string())),
        }
    }

    /// Value of `phi` with its free variables bound by `env`.
    pub fn eval(&mut self, phi: &Formula, env: &mut Env) -> Result<Elem, EvalError> {
        let h = &self.model.algebra;
        let (top, bottom) = (h.top(), h.bottom());
        match phi {
            Formula::Bot => Ok(bottom),
            Formula::Atom(a) => self.atom(a, env),
            Formula::And(a, b) => {
                let x = self.eval(a, env)?;
                if x == bottom {
                    return Ok(bottom);
                }
                let y = self.eval(b, env)?;
                Ok(self.model.algebra.meet(x, y))
            }
            Formula::Or(a, b) => {
                let x = self.eval(a, env)?;
                if x == top {
                    return Ok(top);
                }
                let y = self.eval(b, env)?;
                Ok(self.model.algebra.join(x, y))
            }
            Formula::Imp(a, b) => {
                let x = self.eval(a, env)?;
                if x == bottom {
                    return Ok(top);
                }
                let y = self.eval(b, env)?;
                Ok(self.model.algebra.imp(x, y))
            }
            Formula::Forall(..) | Formula::Exists(..) => self.quantifier(phi, env),
            Formula::Neg(a) => self.negation(phi, a, env),
        }
    }

    fn quantifier(&mut self, phi: &Formula, env: &mut Env) -> Result<Elem, EvalError> {
        let universal = matches!(phi, Formula::Forall(..));
        if self.model.bounded_opt {
            let bounded = if universal { phi.as_bounded_forall() } else { phi.as_bounded_exists() };
            if let Some((x, t, body)) = bounded {
                let u = self.term(t, env)?;
                let entries = self.model.store.entries(u).to_vec();
                let mut acc = if universal { self.model.algebra.top() } else { self.model.algebra.bottom() };
                for (y, uy) in entries {
                    env.push((x.to_string(), y));
                    let r = self.eval(body, env);
                    env.pop();
                    let h = &self.model.algebra;
                    acc = if universal { h.meet(acc, h.imp(uy, r?)) } else { h.join(acc, h.meet(uy, r?)) };
                    if acc == if universal { h.bottom() } else { h.top() } {
                        break;
                    }
                }
                return Ok(acc);
            }
        }
        let (x, body) = match phi {
            Formula::Forall(x, b) | Formula::Exists(x, b) => (x, b),
            _ => unreachable!(),
        };
        let mut acc = if universal { self.model.algebra.top() } else { self.model.algebra.bottom() };
        for i in 0..self.model.scope.len() {
            let y = self.model.scope[i];
            env.push((x.clone(), y));
            let r = self.eval(body, env);
            env.pop();
            let h = &self.model.algebra;
            acc = if universal { h.meet(acc, r?) } else { h.join(acc, r?) };
            if acc == if universal { h.bottom() } else { h.top() } {
                break;
            }
        }
        Ok(acc)
    }

    fn negation(&mut self, phi: &Formula, a: &Formula, env: &mut Env) -> Result<Elem, EvalError> {
        match self.model.mode {
            Mode::Boolean | Mode::Heyting => {
                let x = self.eval(a, env)?;
                Ok(self.model.algebra.pseudo_complement(x))
            }
            Mode::N4 => match a {
                Formula::Bot | Formula::Atom(_) => {
                    let x = self.eval(a, env)?;
                    let domain = self.model.neg_domain(x);
                    self.choices.choose(close(phi, env), domain)
                }
                Formula::Neg(b) => self.eval(b, env),
                Formula::And(b, c) => {
                    let x = self.eval(&Formula::neg((**b).clone()), env)?;
                    let y = self.eval(&Formula::neg((**c).clone()), env)?;
                    Ok(self.model.algebra.join(x, y))
                }
                Formula::Or(b, c) => {
                    let x = self.eval(&Formula::neg((**b).clone()), env)?;
                    let y = self.eval(&Formula::neg((**c).clone()), env)?;
                    Ok(self.model.algebra.meet(x, y))
                }
                Formula::Imp(b, c) => {
                    let x = self.eval(b, env)?;
                    let y = self.eval(&Formula::neg((**c).clone()), env)?;
                    Ok(self.model.algebra.meet(x, y))
                }
                Formula::Forall(..) | Formula::Exists(..) => {
                    Err(EvalError::NegOverQuantifier(close(phi, env).to_string()))
                }
            },
            Mode::Comega => {
                let x = self.eval(a, env)?;
                let mut domain = self.model.neg_domain(x);
                if let Formula::Neg(b) = a {
                    // ||~~b|| ≤ ||b||
                    let y = self.eval(b, env)?;
                    domain.retain(|&d| self.model.algebra.leq(d, y));
                }
                self.choices.choose(close(phi, env), domain)
            }
        }
    }
}

/// `||phi||` under a complete assignment.
pub fn eval_sentence(phi: &Formula, model: &mut SetModel, assignment: &NegationAssignment) -> Result<Elem, EvalError> {
    let mut choices = Choices::strict(assignment.0.clone());
    Valuation {
        model,
        choices: &mut choices,
    }
    .eval(phi, &mut Vec::new())
}

/// Every admissible assignment for the negations `phi` meets, with the
/// value under each.
pub fn explore_sentence(
    phi: &Formula,
    model: &mut SetModel,
    cap: usize,
) -> Result<Vec<(NegationAssignment, Elem)>, EvalError> {
    let out = explore(cap, |choices| {
        Valuation {
            model: &mut *model,
            choices,
        }
        .eval(phi, &mut Vec::new())
    })?;
    Ok(out.into_iter().map(|(a, v)| (NegationAssignment(a), v)).collect())
}

/// All admissible negation assignments for `phi`, in lexicographic order.
pub fn enumerate_assignments(phi: &Formula, model: &mut SetModel) -> Result<Vec<NegationAssignment>, EvalError> {
    Ok(explore_sentence(phi, model, ASSIGNMENT_CAP)?
        .into_iter()
        .map(|(a, _)| a)
        .collect())
}

// ---------------------------------------------------------------------------
// Validity

/// Both readings of validity over a family of points whose meet is the
/// quantity of interest.
#[derive(Debug, Clone)]
pub struct Judgement {
    /// Meet over points of the least value over assignments.
    pub all_value: Elem,
    pub all_valid: bool,
    /// First point (with assignment and value) below top, if any.
    pub falsifier: Option<(usize, NegationAssignment, Elem)>,
    pub some_valid: bool,
    pub satisfier: Option<NegationAssignment>,
    /// Meet over points of the best value any assignment reaches there.
    pub some_bound: Elem,
    pub outcomes: usize,
}

/// Evaluates each point under all its local assignments.
///
/// For `all`, the meet of per-point minima equals the minimum over global
/// assignments, because any local outcome extends to a global assignment.
/// For `some`, a single assignment satisfying every point is searched for.
pub fn judge_points<P>(
    model: &mut SetModel,
    points: &[P],
    cap: usize,
    mut run: impl FnMut(&mut Valuation, &P) -> Result<Elem, EvalError>,
) -> Result<Judgement, EvalError> {
    let h = model.algebra.clone();
    let mut all_value = h.top();
    let mut some_bound = h.top();
    let mut falsifier = None;
    let mut satisfying: Vec<Vec<BTreeMap<Formula, Elem>>> = Vec::new();
    let mut outcomes = 0;
    for (i, p) in points.iter().enumerate() {
        let local = explore(cap, |choices| {
            let mut val = Valuation {
                model: &mut *model,
                choices,
            };
            run(&mut val, p)
        })?;
        outcomes += local.len();
        let mut best = h.bottom();
        let mut good = Vec::new();
        for (a, v) in local {
            all_value = h.meet(all_value, v);
            best = h.join(best, v);
            if v == h.top() {
                good.push(a);
            } else if falsifier.is_none() {
                falsifier = Some((i, NegationAssignment(a), v));
            }
        }
        some_bound = h.meet(some_bound, best);
        // A point satisfied without any choice constrains nothing.
        if !good.iter().any(|a| a.is_empty()) {
            satisfying.push(good);
        }
    }
    let solution = solve_some(&satisfying)?;
    Ok(Judgement {
        all_value,
        all_valid: all_value == h.top(),
        falsifier,
        some_valid: solution.is_some(),
        satisfier: solution.map(NegationAssignment),
        some_bound,
        outcomes,
    })
}

/// Outcome of a validity check, always naming its reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub mode: Mode,
    pub quant: Quant,
    pub rank_bound: usize,
    /// Under `all`: the least value over assignments. Under `some`: top if
    /// valid, otherwise an upper bound on every assignment's value.
    pub value: Elem,
    pub valid: bool,
    /// A falsifying assignment under `all`, a satisfying one under `some`.
    pub assignment: Option<NegationAssignment>,
    pub outcomes: usize,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn from_judgement(model: &SetModel, j: &Judgement, quant: Quant) -> Verdict {
        let (value, valid, assignment) = match quant {
            Quant::All => (j.all_value, j.all_valid, j.falsifier.as_ref().map(|(_, a, _)| a.clone())),
            Quant::Some => (
                if j.some_valid { model.algebra.top() } else { j.some_bound },
                j.some_valid,
                j.satisfier.clone(),
            ),
        };
        Verdict {
            mode: model.mode,
            quant,
            rank_bound: model.rank_bound,
            value,
            valid,
            assignment,
            outcomes: j.outcomes,
            notes: vec![format!(
                "rank-relative: quantifiers range over {} names of rank <= {}",
                model.scope.len(),
                model.rank_bound
            )],
        }
    }

    /// `RESULT mode=<m> rank=<k> quant=<q> value=<e> valid=<yes|no> assignment=<fp|none>`
    pub fn result_line(&self) -> String {
        format!(
            "RESULT mode={} rank={} quant={} value={} valid={} assignment={}",
            self.mode,
            self.rank_bound,
            self.quant.as_str(),
            self.value,
            if self.valid { "yes" } else { "no" },
            self.assignment.as_ref().map_or("none".to_string(), |a| a.fingerprint())
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode:       {}", self.mode)?;
        writeln!(f, "quantified: {} assignments", self.quant.as_str())?;
        writeln!(f, "value:      {}", self.value)?;
        writeln!(f, "valid:      {}", if self.valid { "yes" } else { "no" })?;
        writeln!(f, "outcomes:   {}", self.outcomes)?;
        if let Some(a) = &self.assignment {
            let role = if self.quant == Quant::All { "falsified by" } else { "satisfied by" };
            writeln!(f, "{role}: {a}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Splits a closed sentence into points whose meet is its value: top-level
/// conjunctions and unbounded universal quantifiers over the scope.
fn split_points(phi: &Formula, model: &SetModel, out: &mut Vec<Formula>) -> Result<(), EvalError> {
    if out.len() > POINT_CAP {
        return Err(EvalError::CapExceeded {
            what: "sentence points".into(),
            cap: POINT_CAP,
        });
    }
    match phi {
        Formula::And(a, b) => {
            split_points(a, model, out)?;
            split_points(b, model, out)
        }
        Formula::Forall(x, body) if !(model.bounded_opt && phi.as_bounded_forall().is_some()) => {
            for &u in &model.scope {
                split_points(&body.instantiate(x, u), model, out)?;
            }
            Ok(())
        }
        _ => {
            out.push(phi.clone());
            Ok(())
        }
    }
}

/// Checks `||phi|| = top` under the given reading of the negation choices.
pub fn check_valid(phi: &Formula, model: &mut SetModel, quant: Quant) -> Result<Verdict, EvalError> {
    if let Some(x) = phi.free_vars().into_iter().next() {
        return Err(EvalError::FreeVariable(x));
    }
    let points = if phi.has_negation() && model.mode != Mode::Boolean && model.mode != Mode::Heyting {
        let mut pts = Vec::new();
        split_points(phi, model, &mut pts)?;
        pts
    } else {
        vec![phi.clone()]
    };
    let j = judge_points(model, &points, ASSIGNMENT_CAP, |val, p| val.eval(p, &mut Vec::new()))?;
    Ok(Verdict::from_judgement(model, &j, quant))
}

/// A failure of `||u ≈ v|| ≤ ||φ(u)|| → ||φ(v)||`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeibnizViolation {
    pub u: NameId,
    pub v: NameId,
    pub formula: Formula,
    pub assignment: NegationAssignment,
    pub eq: Elem,
    pub lhs: Elem,
    pub rhs: Elem,
}

#[derive(Debug, Clone)]
pub struct LeibnizReport {
    pub verdict: Verdict,
    pub pairs: usize,
    pub violation: Option<LeibnizViolation>,
}

fn single_free_var(phi: &Formula) -> Result<String, EvalError> {
    let fv = phi.free_vars();
    if fv.len() != 1 {
        return Err(EvalError::WrongFreeVariables(phi.to_string()));
    }
    Ok(fv.into_iter().next().expect("one variable"))
}

/// Checks the Leibniz inequality for every family member and every pair
/// of names in scope of rank at most `rank`.
pub fn check_leibniz(
    model: &mut SetModel,
    family: &[Formula],
    rank: usize,
    quant: Quant,
) -> Result<LeibnizReport, EvalError> {
    let names = model.names_up_to(rank);
    let mut points = Vec::new();
    for phi in family {
        let x = single_free_var(phi)?;
        for &u in &names {
            for &v in &names {
                points.push((phi.instantiate(&x, u), phi.instantiate(&x, v), u, v, phi.clone()));
            }
        }
    }
    let j = judge_points(model, &points, ASSIGNMENT_CAP, |val, (pu, pv, u, v, _)| {
        let e = val.model.eq(*u, *v);
        let a = val.eval(pu, &mut Vec::new())?;
        let b = val.eval(pv, &mut Vec::new())?;
        let h = &val.model.algebra;
        Ok(h.imp(e, h.imp(a, b)))
    })?;
    let violation = match (&j.falsifier, quant) {
        (Some((i, a, _)), Quant::All) => {
            let (pu, pv, u, v, phi) = &points[*i];
            let e = model.eq(*u, *v);
            let lhs = eval_sentence(pu, model, a)?;
            let rhs = eval_sentence(pv, model, a)?;
            Some(LeibnizViolation {
                u: *u,
                v: *v,
                formula: phi.clone(),
                assignment: a.clone(),
                eq: e,
                lhs,
                rhs,
            })
        }
        _ => None,
    };
    Ok(LeibnizReport {
        verdict: Verdict::from_judgement(model, &j, quant),
        pairs: points.len(),
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidel::saturate;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    fn sat3(kind: Kind, rank: usize) -> SetModel {
        SetModel::with_structure(saturate(&HeytingAlgebra::chain(3), kind), rank, Policy::Full).unwrap()
    }

    #[test]
    fn one_step_membership() {
        let mut m = sat3(Kind::N4, 2);
        let a = m.mk_name(&[(NameId::EMPTY, 1)]).unwrap();
        assert_eq!(m.mem(NameId::EMPTY, a), 1);
        assert_eq!(m.eq(a, a), 2);
        assert_eq!(mem_uncached(&m.store, &m.algebra, NameId::EMPTY, a), 1);
    }

    #[test]
    fn bottom_and_existential_self_equality() {
        let mut m = SetModel::heyting(HeytingAlgebra::chain(2), 2, Policy::Full).unwrap();
        assert_eq!(m.mode, Mode::Boolean);
        let none = NegationAssignment::default();
        assert_eq!(eval_sentence(&Formula::Bot, &mut m, &none).unwrap(), 0);
        for u in m.scope.clone() {
            let phi = f(&format!("exists x . x eq #{}", u.0));
            assert_eq!(eval_sentence(&phi, &mut m, &none).unwrap(), 1);
        }
    }

    #[test]
    fn assignment_enumeration() {
        let mut m = sat3(Kind::N4, 2);
        assert_eq!(enumerate_assignments(&f("#0 eq #0"), &mut m).unwrap(), vec![NegationAssignment::default()]);
        let a = enumerate_assignments(&f("~(#0 eq #0)"), &mut m).unwrap();
        let vals: Vec<Elem> = a.iter().map(|x| *x.0.values().next().unwrap()).collect();
        assert_eq!(vals, vec![0, 1, 2]);
        // The same sentence gets one value per assignment.
        assert_eq!(enumerate_assignments(&f("~(#0 eq #0) & ~(#0 eq #0)"), &mut m).unwrap().len(), 3);
    }

    #[test]
    fn contradiction_satisfiable_but_not_valid() {
        let mut m = sat3(Kind::N4, 2);
        let phi = f("#0 eq #0 & ~(#0 eq #0)");
        let some = check_valid(&phi, &mut m, Quant::Some).unwrap();
        assert!(some.valid);
        assert_eq!(some.value, 2);
        let all = check_valid(&phi, &mut m, Quant::All).unwrap();
        assert!(!all.valid);
        assert_eq!(all.value, 0);
        assert_eq!(all.assignment.as_ref().unwrap().0.values().copied().collect::<Vec<_>>(), vec![0]);
        assert!(all.result_line().starts_with("RESULT mode=n4 rank=2 quant=all value=0 valid=no assignment="));
    }

    #[test]
    fn strict_evaluation_reports_gaps() {
        let mut m = sat3(Kind::N4, 2);
        let err = eval_sentence(&f("~(#0 in #0)"), &mut m, &NegationAssignment::default()).unwrap_err();
        assert!(matches!(err, EvalError::UncoveredNegation(_)));
        let bad = NegationAssignment(BTreeMap::from([(f("~(#0 in #0)"), 1)]));
        // ||#0 in #0|| = 0 and N_0 = {2} in the saturated chain.
        assert!(matches!(eval_sentence(&f("~(#0 in #0)"), &mut m, &bad), Err(EvalError::InadmissibleChoice { .. })));
        assert!(matches!(
            eval_sentence(&f("~forall x . x in x"), &mut m, &NegationAssignment::default()),
            Err(EvalError::NegOverQuantifier(_))
        ));
    }

    #[test]
    fn excluded_middle_in_saturated_structures() {
        for kind in [Kind::N4, Kind::Comega] {
            let mut m = sat3(kind, 2);
            let names = m.scope.clone();
            for &u in &names {
                for &v in &names {
                    for rel in ["in", "eq"] {
                        let phi = f(&format!("#{} {rel} #{} | ~(#{} {rel} #{})", u.0, v.0, u.0, v.0));
                        assert!(check_valid(&phi, &mut m, Quant::All).unwrap().valid, "{phi}");
                    }
                }
            }
        }
    }

    #[test]
    fn comega_double_negation_is_bounded() {
        let mut m = sat3(Kind::Comega, 2);
        let a = m.mk_name(&[(NameId::EMPTY, 1)]).unwrap();
        let phi = f(&format!("~~(#0 in #{}) -> #0 in #{}", a.0, a.0));
        let out = explore_sentence(&phi, &mut m, 100).unwrap();
        assert!(out.iter().all(|(_, v)| *v == 2));
        // ~(0 in a) ranges over N_1 = {2}; ~~ over N_2 ∩ ↓1 = {0, 1}.
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn fingerprints_are_stable() {
        let a = NegationAssignment(BTreeMap::from([(f("~(#0 in #0)"), 2)]));
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
        assert_eq!(NegationAssignment::default().fingerprint(), "none");
    }

    #[test]
    fn csp_finds_joint_assignment() {
        let k = |s: &str| s.to_string();
        let p1 = vec![BTreeMap::from([(k("a"), 0)]), BTreeMap::from([(k("a"), 1)])];
        let p2 = vec![BTreeMap::from([(k("a"), 1), (k("b"), 0)])];
        let sol = solve_some(&[p1.clone(), p2]).unwrap().unwrap();
        assert_eq!(sol[&k("a")], 1);
        let p3 = vec![BTreeMap::from([(k("a"), 2)])];
        assert_eq!(solve_some(&[p1, p3]).unwrap(), None);
    }

    #[test]
    fn positive_leibniz_holds() {
        let mut m = SetModel::heyting(HeytingAlgebra::chain(2), 2, Policy::Full).unwrap();
        let r = check_leibniz(&mut m, &[f("x in #2"), f("x eq x"), f("exists y . y in x")], 2, Quant::All).unwrap();
        assert!(r.verdict.valid);
        assert_eq!(r.pairs, 27);
    }

    #[test]
    fn negated_leibniz_needs_coherent_choices() {
        let mut m = sat3(Kind::N4, 2);
        // ||x ∈ w|| is top for every name equal to ∅̇, and N_top has three values.
        let w = m.mk_name(&[(NameId::EMPTY, 2)]).unwrap();
        let fam = [f(&format!("~(x in #{})", w.0))];
        let all = check_leibniz(&mut m, &fam, 2, Quant::All).unwrap();
        let some = check_leibniz(&mut m, &fam, 2, Quant::Some).unwrap();
        assert!(!all.verdict.valid);
        let v = all.violation.unwrap();
        assert!(!m.algebra.leq(v.eq, m.algebra.imp(v.lhs, v.rhs)));
        assert!(some.verdict.valid);
    }

    #[test]
    fn mixture_of_one_part_is_equal() {
        let mut m = SetModel::heyting(HeytingAlgebra::chain(3), 2, Policy::Full).unwrap();
        for u in m.scope.clone() {
            let w = m.mixture(&[(2, u)]).unwrap();
            assert_eq!(m.eq(u, w), 2);
            let z = m.mixture(&[(0, u)]).unwrap();
            assert!(m.store.entries(z).iter().all(|&(_, e)| e == 0));
        }
    }
}
