//! Exhaustive countermodel search over small algebras, F-structures and
//! Θ-structures.
//!
//! Every finding is re-evaluated in a fresh concrete structure before it is
//! reported, then shrunk greedily. An exhausted search is repeated in a
//! seeded shuffled order as a cross-check.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{enumerate_heyting, Elem};
use crate::fidel::{enumerate_structures, saturate, FStructure, Kind};
use crate::syntax::{parse_formula, universal_closure, Atom, Formula, Signature, Term};
use crate::theta::{eval_qcw, eval_qn4, explore_theta_many, ThetaStructure};
use crate::valuation::{Choices, EvalError};

pub const MAX_ALGEBRA_CAP: usize = 4;
pub const MAX_DOMAIN_CAP: usize = 3;
pub const MAX_ASSIGNMENTS_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalKind {
    /// `{p, ~p}` does not entail `q`.
    NonExplosion,
    /// Some structure gives the formula a value below top.
    RefuteFormula(Formula),
    /// All premises top, conclusion below top.
    RefuteSequent(Vec<Formula>, Formula),
    /// A countermodel to `~p -> (p -> q)` among N4 structures.
    SeparateN4N3,
    /// Equal-valued atoms with different negation values.
    Congruence,
}

impl GoalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GoalKind::NonExplosion => "non_explosion",
            GoalKind::RefuteFormula(_) => "refute_formula",
            GoalKind::RefuteSequent(..) => "refute_sequent",
            GoalKind::SeparateN4N3 => "separate_n4_n3",
            GoalKind::Congruence => "congruence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_algebra: usize,
    pub max_domain: usize,
    pub max_assignments: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_algebra: 4,
            max_domain: 2,
            max_assignments: 200_000,
        }
    }
}

/// Which F-structures to search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    /// All structures of `kind` over enumerated algebras; `explosive`
    /// keeps only N3 structures, `saturated` only the saturated one.
    Enumerated { kind: Kind, explosive: bool, saturated: bool },
    /// Exactly these structures.
    Fixed(Vec<FStructure>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchGoal {
    pub kind: GoalKind,
    pub space: Space,
    pub budget: SearchBudget,
    pub seed: u64,
}

impl SearchGoal {
    pub fn new(kind: GoalKind) -> Self {
        SearchGoal {
            kind,
            space: Space::Enumerated {
                kind: Kind::N4,
                explosive: false,
                saturated: false,
            },
            budget: SearchBudget::default(),
            seed: 0,
        }
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn with_budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("budget {what}={value} outside 1..={cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("structure enumeration failed: {0}")]
    Structures(String),
    #[error("certificate failed re-evaluation: {0}")]
    Uncertified(String),
    #[error("shuffled pass found a certificate the ordered pass missed")]
    OrderDependent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub goal: String,
    pub structure: FStructure,
    pub carrier: usize,
    /// Table entries and negation choices the certificate depends on.
    pub tables: BTreeMap<String, Elem>,
    pub values: Vec<(Formula, Elem)>,
    pub notes: Vec<String>,
}

impl Finding {
    pub fn tables_line(&self) -> String {
        self.tables.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certificate for {}", self.goal)?;
        writeln!(f, "structure kind={}", self.structure.kind().as_str())?;
        for line in self.structure.to_string().lines() {
            writeln!(f, "  {line}")?;
        }
        writeln!(f, "carrier {}", self.carrier)?;
        writeln!(f, "tables {}", self.tables_line())?;
        for (phi, v) in &self.values {
            writeln!(f, "value {phi} = {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "certified: yes")
    }
}

/// How much of the space was searched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    pub algebras: usize,
    pub structures: usize,
    pub table_assignments: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Found(Finding),
    Exhausted { census: Census, notes: Vec<String> },
}

impl Outcome {
    pub fn found(&self) -> bool {
        matches!(self, Outcome::Found(_))
    }

    pub fn finding(&self) -> Option<&Finding> {
        match self {
            Outcome::Found(f) => Some(f),
            Outcome::Exhausted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub goal: String,
    pub seed: u64,
    pub census: Census,
    pub outcome: Outcome,
}

impl SearchReport {
    pub fn result_line(&self) -> String {
        let mut s = format!(
            "RESULT goal={} found={} seed={} structures={}",
            self.goal,
            if self.outcome.found() { "yes" } else { "no" },
            self.seed,
            self.census.structures
        );
        if let Some(f) = self.outcome.finding() {
            s.push_str(&format!(" carrier={} tables={}", f.carrier, f.tables.len()));
        }
        s
    }
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "goal {} seed {}", self.goal, self.seed)?;
        writeln!(
            f,
            "searched {} algebras, {} structures, {} table assignments",
            self.census.algebras, self.census.structures, self.census.table_assignments
        )?;
        match &self.outcome {
            Outcome::Found(finding) => writeln!(f, "{finding}"),
            Outcome::Exhausted { notes, .. } => {
                writeln!(f, "exhausted: no certificate within budget")?;
                for n in notes {
                    writeln!(f, "note: {n}")?;
                }
                Ok(())
            }
        }
    }
}

fn formula(text: &str) -> Formula {
    parse_formula(text, &mut Signature::permissive()).expect("built-in formula parses")
}

/// The evaluated formulas and the acceptance test on their values.
struct Plan {
    formulas: Vec<Formula>,
    accept: Box<dyn Fn(&[Elem], Elem) -> bool + Sync>,
}

fn sequent_plan(premises: Vec<Formula>, conclusion: Formula) -> Plan {
    let n = premises.len();
    let mut formulas: Vec<Formula> = premises.iter().map(universal_closure).collect();
    formulas.push(universal_closure(&conclusion));
    Plan {
        formulas,
        accept: Box::new(move |vals, top| vals[..n].iter().all(|&v| v == top) && vals[n] != top),
    }
}

fn plan(goal: &GoalKind) -> Plan {
    match goal {
        GoalKind::NonExplosion => sequent_plan(vec![formula("p()"), formula("~p()")], formula("q()")),
        GoalKind::RefuteFormula(phi) => sequent_plan(Vec::new(), phi.clone()),
        GoalKind::RefuteSequent(gamma, phi) => sequent_plan(gamma.clone(), phi.clone()),
        GoalKind::SeparateN4N3 => sequent_plan(Vec::new(), formula("~p() -> (p() -> q())")),
        GoalKind::Congruence => Plan {
            formulas: vec![formula("p()"), formula("q()"), formula("~p()"), formula("~q()")],
            accept: Box::new(|v, _| v[0] == v[1] && v[2] != v[3]),
        },
    }
}

fn check_budget(b: &SearchBudget) -> Result<(), SearchError> {
    for (what, value, cap) in [
        ("max_algebra", b.max_algebra, MAX_ALGEBRA_CAP),
        ("max_domain", b.max_domain, MAX_DOMAIN_CAP),
        ("max_assignments", b.max_assignments, MAX_ASSIGNMENTS_CAP),
    ] {
        if value == 0 || value > cap {
            return Err(SearchError::CapExceeded { what, value, cap });
        }
    }
    Ok(())
}

/// Structures in search order: algebras by ascending size, then
/// structures in lexicographic order of their negation families.
pub fn structures(space: &Space, max_algebra: usize) -> Result<(usize, Vec<FStructure>), SearchError> {
    match space {
        Space::Fixed(v) => Ok((v.len(), v.clone())),
        Space::Enumerated {
            kind,
            explosive,
            saturated,
        } => {
            let algebras = enumerate_heyting(max_algebra).map_err(|e| SearchError::Structures(e.to_string()))?;
            let mut out = Vec::new();
            for h in &algebras {
                if *saturated {
                    out.push(saturate(h, *kind));
                } else {
                    out.extend(
                        enumerate_structures(h, *kind, *explosive).map_err(|e| SearchError::Structures(e.to_string()))?,
                    );
                }
            }
            Ok((algebras.len(), out))
        }
    }
}

fn collect_signature(phi: &Formula, preds: &mut BTreeMap<String, usize>, funcs: &mut BTreeMap<String, usize>) {
    fn term(t: &Term, funcs: &mut BTreeMap<String, usize>) {
        if let Term::App(g, args) = t {
            funcs.insert(g.clone(), args.len());
            args.iter().for_each(|a| term(a, funcs));
        }
    }
    match phi {
        Formula::Bot => {}
        Formula::Atom(a) => {
            let (name, arity) = match a {
                Atom::Mem(..) => ("in".to_string(), 2),
                Atom::Eq(..) => ("eq".to_string(), 2),
                Atom::Pred(p, args) => (p.clone(), args.len()),
            };
            preds.insert(name, arity);
            a.terms().into_iter().for_each(|t| term(t, funcs));
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_signature(a, preds, funcs);
            collect_signature(b, preds, funcs);
        }
        Formula::Neg(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => collect_signature(a, preds, funcs),
    }
}

/// Re-evaluates `formulas` in a fresh concrete structure built from `tables`.
pub fn reevaluate(
    formulas: &[Formula],
    structure: &FStructure,
    carrier: usize,
    tables: &BTreeMap<String, Elem>,
) -> Result<Vec<Elem>, EvalError> {
    let (mut preds, mut funcs) = (BTreeMap::new(), BTreeMap::new());
    formulas.iter().for_each(|f| collect_signature(f, &mut preds, &mut funcs));
    let preds: Vec<(String, usize)> = preds.into_iter().collect();
    let funcs: Vec<(String, usize)> = funcs.into_iter().collect();
    let theta = ThetaStructure::from_choices(structure.clone(), carrier, &preds, &funcs, tables);
    theta.validate()?;
    let empty = BTreeMap::new();
    formulas
        .iter()
        .map(|phi| match structure.kind() {
            Kind::Comega => eval_qcw(phi, &theta, &empty, &mut Choices::strict(tables.clone())),
            _ => eval_qn4(phi, &theta, &empty),
        })
        .collect()
}

fn certifies(plan: &Plan, fs: &FStructure, carrier: usize, tables: &BTreeMap<String, Elem>) -> Option<Vec<Elem>> {
    let vals = reevaluate(&plan.formulas, fs, carrier, tables).ok()?;
    (plan.accept)(&vals, fs.algebra().top()).then_some(vals)
}

/// Greedily lowers each table entry while the certificate still holds.
fn minimise(plan: &Plan, fs: &FStructure, carrier: usize, mut tables: BTreeMap<String, Elem>) -> BTreeMap<String, Elem> {
    let keys: Vec<String> = tables.keys().cloned().collect();
    for key in keys {
        let current = tables[&key];
        for lower in 0..current {
            let mut trial = tables.clone();
            trial.insert(key.clone(), lower);
            if certifies(plan, fs, carrier, &trial).is_some() {
                tables = trial;
                break;
            }
        }
    }
    tables
}

type Hit = (usize, usize, BTreeMap<String, Elem>);

fn scan(
    plan: &Plan,
    list: &[FStructure],
    carriers: &[usize],
    budget: &SearchBudget,
) -> Result<(usize, Option<Hit>), SearchError> {
    let results: Vec<Result<(usize, Option<Hit>), EvalError>> = list
        .par_iter()
        .enumerate()
        .map(|(i, fs)| {
            let mut evals = 0;
            for &carrier in carriers {
                let outcomes = explore_theta_many(&plan.formulas, fs, carrier, budget.max_assignments)?;
                evals += outcomes.len();
                let top = fs.algebra().top();
                if let Some((tables, _)) = outcomes.into_iter().find(|(_, v)| (plan.accept)(v, top)) {
                    return Ok((evals, Some((i, carrier, tables))));
                }
            }
            Ok((evals, None))
        })
        .collect();
    let mut total = 0;
    let mut first = None;
    for r in results {
        let (n, hit) = r?;
        total += n;
        if first.is_none() {
            first = hit;
        }
    }
    Ok((total, first))
}

/// Runs the search described by `goal`.
pub fn search(goal: &SearchGoal) -> Result<SearchReport, SearchError> {
    check_budget(&goal.budget)?;
    let plan = plan(&goal.kind);
    let space = match (&goal.kind, &goal.space) {
        (GoalKind::SeparateN4N3, Space::Enumerated { saturated, .. }) => Space::Enumerated {
            kind: Kind::N4,
            explosive: false,
            saturated: *saturated,
        },
        (_, s) => s.clone(),
    };
    let (algebras, list) = structures(&space, goal.budget.max_algebra)?;
    let carriers: Vec<usize> = (1..=goal.budget.max_domain).collect();
    let (evals, hit) = scan(&plan, &list, &carriers, &goal.budget)?;
    let census = Census {
        algebras,
        structures: list.len(),
        table_assignments: evals,
    };
    let name = goal.kind.as_str().to_string();
    let outcome = match hit {
        Some((i, carrier, tables)) => {
            let fs = &list[i];
            if certifies(&plan, fs, carrier, &tables).is_none() {
                return Err(SearchError::Uncertified(format!("structure {i}, carrier {carrier}")));
            }
            let tables = minimise(&plan, fs, carrier, tables);
            let vals = certifies(&plan, fs, carrier, &tables)
                .ok_or_else(|| SearchError::Uncertified("minimised certificate".into()))?;
            let mut notes = Vec::new();
            if goal.kind == GoalKind::Congruence {
                notes.push("finite evidence of a non-congruential negation, not a proof of non-algebraizability".into());
            }
            if goal.kind == GoalKind::SeparateN4N3 {
                let n3 = SearchGoal {
                    kind: GoalKind::RefuteFormula(formula("~p() -> (p() -> q())")),
                    space: Space::Enumerated {
                        kind: Kind::N4,
                        explosive: true,
                        saturated: false,
                    },
                    budget: goal.budget,
                    seed: goal.seed,
                };
                let r = search(&n3)?;
                notes.push(format!(
                    "explosive (N3) structures within budget: {}",
                    if r.outcome.found() { "countermodel exists" } else { "no countermodel" }
                ));
            }
            Outcome::Found(Finding {
                goal: name.clone(),
                structure: fs.clone(),
                carrier,
                tables,
                values: plan.formulas.iter().cloned().zip(vals).collect(),
                notes,
            })
        }
        None => {
            let mut shuffled = list.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(goal.seed);
            shuffled.shuffle(&mut rng);
            let mut rev = carriers.clone();
            rev.shuffle(&mut rng);
            if scan(&plan, &shuffled, &rev, &goal.budget)?.1.is_some() {
                return Err(SearchError::OrderDependent);
            }
            Outcome::Exhausted {
                census,
                notes: vec![format!("confirmed by a shuffled second pass (seed {})", goal.seed)],
            }
        }
    };
    Ok(SearchReport {
        goal: name,
        seed: goal.seed,
        census,
        outcome,
    })
}

/// Searches for equal-valued atoms with distinct admissible negations.
pub fn congruence_probe(space: Space, budget: SearchBudget, seed: u64) -> Result<SearchReport, SearchError> {
    search(&SearchGoal {
        kind: GoalKind::Congruence,
        space,
        budget,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HeytingAlgebra;
    use crate::fidel::validate_n4;

    fn sat(n: usize, kind: Kind) -> Space {
        Space::Fixed(vec![saturate(&HeytingAlgebra::chain(n), kind)])
    }

    #[test]
    fn non_explosion_on_saturated_chain() {
        let g = SearchGoal::new(GoalKind::NonExplosion).with_space(sat(3, Kind::N4));
        let r = search(&g).unwrap();
        let f = r.outcome.finding().expect("certificate");
        assert_eq!(f.tables["p()"], 2);
        assert_eq!(f.tables["~p()"], 2);
        assert!(f.tables["q()"] < 2);
    }

    #[test]
    fn excluded_middle_holds_in_saturated_comega() {
        let g = SearchGoal::new(GoalKind::RefuteFormula(formula("p() | ~p()")))
            .with_space(Space::Enumerated {
                kind: Kind::Comega,
                explosive: false,
                saturated: true,
            })
            .with_budget(SearchBudget {
                max_algebra: 4,
                max_domain: 1,
                max_assignments: 10_000,
            });
        assert!(!search(&g).unwrap().outcome.found());
    }

    #[test]
    fn congruence_probe_cases() {
        let b = SearchBudget {
            max_domain: 1,
            ..SearchBudget::default()
        };
        let r = congruence_probe(sat(3, Kind::N4), b, 1).unwrap();
        let f = r.outcome.finding().unwrap();
        assert_eq!((f.tables["p()"], f.tables["q()"]), (2, 2));
        assert_eq!((f.tables["~p()"], f.tables["~q()"]), (0, 1));
        let r = congruence_probe(sat(2, Kind::N4), b, 1).unwrap();
        let f = r.outcome.finding().unwrap();
        assert_eq!((f.tables["~p()"], f.tables["~q()"]), (0, 1));
        let functional = validate_n4(HeytingAlgebra::chain(2), vec![vec![1], vec![0]]).unwrap();
        let r = congruence_probe(Space::Fixed(vec![functional]), b, 1).unwrap();
        assert!(!r.outcome.found());
    }

    #[test]
    fn budget_caps_enforced() {
        let g = SearchGoal::new(GoalKind::NonExplosion).with_budget(SearchBudget {
            max_algebra: 9,
            ..SearchBudget::default()
        });
        assert!(matches!(search(&g), Err(SearchError::CapExceeded { .. })));
    }
}
