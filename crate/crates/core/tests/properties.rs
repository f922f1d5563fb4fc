use std::sync::OnceLock;

use proptest::prelude::*;

use pst::algebra::{enumerate_heyting, HeytingAlgebra};
use pst::fidel::{saturate, Kind};
use pst::kernel::{match_schema, schema};
use pst::search::{reevaluate, search, GoalKind, SearchBudget, SearchGoal, Space};
use pst::syntax::{substitute, Formula, Term};
use pst::universe::{NameId, Policy};
use pst::valuation::{mem_uncached, SetModel};

fn algebras() -> &'static [HeytingAlgebra] {
    static ALL: OnceLock<Vec<HeytingAlgebra>> = OnceLock::new();
    ALL.get_or_init(|| enumerate_heyting(6).unwrap())
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::pred("p", vec![])),
        Just(Formula::pred("q", vec![])),
        Just(Formula::pred("P", vec![Term::var("x")])),
        Just(Formula::Bot),
    ]
}

fn prop_formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.clone().prop_map(Formula::neg),
            inner.prop_map(|a| Formula::forall("x", a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn heyting_laws(i in 0usize..1000, x in 0usize..6, y in 0usize..6, z in 0usize..6) {
        let h = &algebras()[i % algebras().len()];
        let n = h.size();
        let (x, y, z) = (x % n, y % n, z % n);
        prop_assert_eq!(h.leq(h.meet(x, y), z), h.leq(x, h.imp(y, z)));
        prop_assert_eq!(h.meet(x, h.join(y, z)), h.join(h.meet(x, y), h.meet(x, z)));
        prop_assert_eq!(h.imp(x, x), h.top());
        prop_assert_eq!(h.pseudo_complement(x), h.imp(x, h.bottom()));
        prop_assert!(h.leq(h.meet(x, h.imp(x, y)), y));
    }

    #[test]
    fn positive_axioms_match_their_schemas(a in prop_formula(), b in prop_formula(), c in prop_formula()) {
        let instances = [
            ("N1", Formula::imp(a.clone(), Formula::imp(b.clone(), a.clone()))),
            ("N5", Formula::imp(a.clone(), Formula::imp(b.clone(), Formula::and(a.clone(), b.clone())))),
            ("N6", Formula::imp(a.clone(), Formula::or(a.clone(), b.clone()))),
            ("N8", Formula::imp(
                Formula::imp(a.clone(), c.clone()),
                Formula::imp(Formula::imp(b.clone(), c.clone()), Formula::imp(Formula::or(a.clone(), b.clone()), c.clone())),
            )),
            ("N13", Formula::iff(Formula::neg(Formula::neg(c.clone())), c.clone())),
        ];
        for (id, phi) in instances {
            let m = match_schema(&phi, &schema(id).unwrap());
            prop_assert!(m.is_ok(), "{} should match {}", phi, id);
        }
        // N1 needs the two outer antecedent copies to agree.
        let skew = Formula::imp(a.clone(), Formula::imp(b, c.clone()));
        prop_assert_eq!(match_schema(&skew, &schema("N1").unwrap()).is_ok(), a == c);
    }

    #[test]
    fn substituting_a_variable_for_itself_is_identity(phi in prop_formula()) {
        prop_assert_eq!(substitute(&phi, "x", &Term::var("x")).unwrap(), phi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_and_equality_laws(u in 0u32..13, v in 0u32..13) {
        let mut m = SetModel::with_structure(saturate(&HeytingAlgebra::chain(3), Kind::Comega), 2, Policy::Full).unwrap();
        let n = m.scope.len() as u32;
        let (u, v) = (m.scope[(u % n) as usize], m.scope[(v % n) as usize]);
        prop_assert_eq!(m.eq(u, u), m.algebra.top());
        prop_assert_eq!(m.eq(u, v), m.eq(v, u));
        prop_assert_eq!(m.mem(u, v), mem_uncached(&m.store, &m.algebra, u, v));
        let entries: Vec<(NameId, usize)> = m.store.entries(v).to_vec();
        for (x, a) in entries {
            let member = m.mem(x, v);
            prop_assert!(m.algebra.leq(a, member));
        }
    }

    #[test]
    fn search_is_seed_deterministic_and_certified(seed in any::<u64>()) {
        let budget = SearchBudget { max_algebra: 3, max_domain: 1, max_assignments: 10_000 };
        let g = SearchGoal::new(GoalKind::NonExplosion).with_budget(budget).with_seed(seed);
        let a = search(&g).unwrap();
        prop_assert_eq!(&a, &search(&g).unwrap());
        let f = a.outcome.finding().unwrap();
        let formulas: Vec<Formula> = f.values.iter().map(|(p, _)| p.clone()).collect();
        let vals = reevaluate(&formulas, &f.structure, f.carrier, &f.tables).unwrap();
        prop_assert_eq!(vals, f.values.iter().map(|(_, v)| *v).collect::<Vec<_>>());
        // An exhausted search stays exhausted under any seed.
        let lem = SearchGoal::new(GoalKind::RefuteFormula(Formula::or(Formula::pred("p", vec![]), Formula::neg(Formula::pred("p", vec![])))))
            .with_space(Space::Fixed(vec![saturate(&HeytingAlgebra::chain(3), Kind::Comega)]))
            .with_budget(budget)
            .with_seed(seed);
        prop_assert!(!search(&lem).unwrap().outcome.found());
    }
}
