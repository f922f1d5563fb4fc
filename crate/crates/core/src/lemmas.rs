//! Desk-scale checks of the structural lemmas about algebra-valued
//! models: equality laws, bounded quantifiers, mixtures, the maximum
//! principle, absoluteness for subalgebras and the hat embedding.

use std::fmt;

use crate::algebra::{check_refinable, Elem};
use crate::syntax::{Atom, Formula, Term};
use crate::universe::{hat_embed, HFSet, NameId};
use crate::valuation::{eval_sentence, EvalError, Mode, NegationAssignment, SetModel};

/// Outcome of an exhaustive lemma check: how many instances were checked
/// and a description of each that failed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    fn new(lemma: &str) -> Self {
        LemmaReport {
            lemma: lemma.into(),
            ..Default::default()
        }
    }

    fn expect(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} instances, {} failures", self.lemma, self.checked, self.failures.len())?;
        for d in self.failures.iter().take(10) {
            writeln!(f, "  {d}")?;
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

/// Value of a closed negation-free sentence.
fn value(model: &mut SetModel, phi: &Formula) -> Result<Elem, EvalError> {
    eval_sentence(phi, model, &NegationAssignment::default())
}

/// Reflexivity and symmetry of `≈`, and `u(x) ≤ ||x ∈ u||`, over all
/// names in scope of rank at most `rank`.
pub fn check_equality_laws(model: &mut SetModel, rank: usize) -> LemmaReport {
    let mut r = LemmaReport::new("equality laws");
    let names = model.names_up_to(rank);
    let top = model.algebra.top();
    for &u in &names {
        let e = model.eq(u, u);
        r.expect(e == top, || format!("||{u} ≈ {u}|| = {e}"));
        for (x, ux) in model.store.entries(u).to_vec() {
            let m = model.mem(x, u);
            r.expect(model.algebra.leq(ux, m), || format!("{u}({x}) = {ux} > ||{x} ∈ {u}|| = {m}"));
        }
        for &v in &names {
            let (a, b) = (model.eq(u, v), model.eq(v, u));
            r.expect(a == b, || format!("||{u} ≈ {v}|| = {a} but ||{v} ≈ {u}|| = {b}"));
        }
    }
    r
}

/// A generated family of negation-free formulas in the free variable `x`,
/// using the given names as parameters.
pub fn formula_family(params: &[NameId]) -> Vec<Formula> {
    let mut out = vec![
        Formula::mem(var("x"), var("x")),
        Formula::exists("y", Formula::mem(var("y"), var("x"))),
        Formula::forall_in("y", var("x"), Formula::exists_in("z", var("x"), Formula::eq(var("y"), var("z")))),
    ];
    for &c in params {
        let (xc, cx, eqc) = (
            Formula::mem(var("x"), name(c)),
            Formula::mem(name(c), var("x")),
            Formula::eq(var("x"), name(c)),
        );
        out.push(xc.clone());
        out.push(cx.clone());
        out.push(eqc.clone());
        out.push(Formula::and(xc.clone(), cx.clone()));
        out.push(Formula::or(xc.clone(), eqc.clone()));
        out.push(Formula::imp(xc.clone(), eqc.clone()));
        out.push(Formula::exists_in("y", var("x"), Formula::mem(var("y"), name(c))));
        out.push(Formula::forall_in("y", var("x"), Formula::eq(var("y"), name(c))));
        out.push(Formula::imp(Formula::forall_in("y", name(c), Formula::mem(var("y"), var("x"))), Formula::Bot));
    }
    out
}

/// Compares `∃x∈u φ` and `∀x∈u φ` computed over the scope with the same
/// formulas computed over `dom(u)`, for every name `u` of rank at most
/// `rank`.
pub fn check_bounded_quantifiers(
    model: &mut SetModel,
    family: &[Formula],
    rank: usize,
) -> Result<LemmaReport, EvalError> {
    let mut r = LemmaReport::new("bounded quantifiers");
    let saved = model.bounded_opt;
    for u in model.names_up_to(rank) {
        for phi in family {
            if phi.has_negation() {
                return Err(EvalError::NotNegationFree(phi.to_string()));
            }
            for bounded in [Formula::exists_in("x", name(u), phi.clone()), Formula::forall_in("x", name(u), phi.clone())] {
                model.bounded_opt = false;
                let plain = value(model, &bounded);
                model.bounded_opt = true;
                let opt = value(model, &bounded);
                model.bounded_opt = saved;
                let (plain, opt) = (plain?, opt?);
                r.expect(plain == opt, || format!("{bounded}: scope {plain}, domain {opt}"));
            }
        }
    }
    Ok(r)
}

/// For every family of at most `max_parts` weighted names of rank at most
/// `rank` with `a_i ∧ a_j ≤ ||u_i ≈ u_j||`, checks `a_i ≤ ||u_i ≈ Σ a·u||`.
pub fn check_mixing_lemma(model: &mut SetModel, max_parts: usize, rank: usize) -> Result<LemmaReport, EvalError> {
    let mut r = LemmaReport::new("mixing lemma");
    let pairs: Vec<(Elem, NameId)> = model
        .names_up_to(rank)
        .into_iter()
        .flat_map(|u| model.algebra.elements().map(move |a| (a, u)))
        .collect();
    // Multisets of pairs, as non-decreasing index sequences.
    let mut stack: Vec<Vec<usize>> = (0..pairs.len()).map(|i| vec![i]).collect();
    while let Some(idx) = stack.pop() {
        if idx.len() < max_parts {
            let last = *idx.last().expect("non-empty");
            for j in last..pairs.len() {
                let mut next = idx.clone();
                next.push(j);
                stack.push(next);
            }
        }
        let parts: Vec<(Elem, NameId)> = idx.iter().map(|&i| pairs[i]).collect();
        let mut compatible = true;
        for &(a, u) in &parts {
            for &(b, v) in &parts {
                let e = model.eq(u, v);
                compatible &= model.algebra.leq(model.algebra.meet(a, b), e);
            }
        }
        if !compatible {
            continue;
        }
        let w = model.mixture(&parts)?;
        for &(a, u) in &parts {
            let e = model.eq(u, w);
            r.expect(model.algebra.leq(a, e), || format!("{parts:?}: {a} > ||{u} ≈ mixture|| = {e}"));
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxPrincipleReport {
    pub formula: Formula,
    pub exists_value: Elem,
    pub witness: Option<NameId>,
    /// The witness was built as a mixture rather than found in scope.
    pub from_mixture: bool,
    pub caveat: Option<String>,
}

/// If `||∃x ψ|| = top` over the scope, looks for a name `u` in scope with
/// `||ψ(u)|| = top`; failing that, mixes the scope along a disjoint
/// refinement of the values `||ψ(u)||` and tests the mixture.
pub fn check_maximum_principle(model: &mut SetModel, psi: &Formula) -> Result<MaxPrincipleReport, EvalError> {
    let refinable = check_refinable(&model.algebra).map_err(|e| EvalError::BadStructure(e.to_string()))?;
    if !refinable.refinable {
        return Err(EvalError::NotRefinable);
    }
    if psi.has_negation() {
        return Err(EvalError::NotNegationFree(psi.to_string()));
    }
    let fv = psi.free_vars();
    let [x] = fv.iter().collect::<Vec<_>>()[..] else {
        return Err(EvalError::WrongFreeVariables(psi.to_string()));
    };
    let top = model.algebra.top();
    let exists_value = value(model, &Formula::exists(x, psi.clone()))?;
    let mut report = MaxPrincipleReport {
        formula: psi.clone(),
        exists_value,
        witness: None,
        from_mixture: false,
        caveat: None,
    };
    if exists_value != top {
        report.caveat = Some(format!("||exists {x} . ψ|| = {exists_value} is not top; nothing to witness"));
        return Ok(report);
    }
    let mut values = Vec::new();
    for u in model.scope.clone() {
        let v = value(model, &psi.instantiate(x, u))?;
        if v == top {
            report.witness = Some(u);
            return Ok(report);
        }
        values.push((u, v));
    }
    // Refine the values to a disjoint family with the same join.
    let mask = values.iter().fold(0u32, |m, &(_, v)| m | 1 << v);
    let cover = refinable.certificates.iter().find(|(s, _)| *s == mask).map(|(_, b)| *b);
    if let Some(cover) = cover {
        let parts: Vec<(Elem, NameId)> = (0..model.algebra.size())
            .filter(|d| cover >> d & 1 == 1)
            .filter_map(|d| values.iter().find(|&&(_, v)| model.algebra.leq(d, v)).map(|&(u, _)| (d, u)))
            .collect();
        let w = model.mixture(&parts)?;
        if value(model, &psi.instantiate(x, w))? == top {
            report.witness = Some(w);
            report.from_mixture = true;
            return Ok(report);
        }
    }
    report.caveat = Some(format!(
        "no witness among {} names of rank <= {} nor their mixture",
        model.scope.len(),
        model.rank_bound
    ));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsolutenessReport {
    pub formula: Formula,
    pub sub_value: Elem,
    pub sup_value: Elem,
    /// Image of `sub_value` under the embedding.
    pub image: Elem,
}

impl AbsolutenessReport {
    pub fn equal(&self) -> bool {
        self.image == self.sup_value
    }
}

/// Compares `||φ||` in `sub` with `||φ||` in `sup`, transporting names
/// along the algebra embedding `emb`. Quantifiers are evaluated over the
/// domains of their bounds.
pub fn check_subalgebra_absolute(
    phi: &Formula,
    sub: &mut SetModel,
    sup: &mut SetModel,
    emb: &[Elem],
) -> Result<AbsolutenessReport, EvalError> {
    if !phi.is_restricted() {
        return Err(EvalError::NotRestricted(phi.to_string()));
    }
    if phi.has_negation() {
        return Err(EvalError::NotNegationFree(phi.to_string()));
    }
    if emb.len() != sub.algebra.size() || emb.iter().any(|&e| e >= sup.algebra.size()) {
        return Err(EvalError::BadStructure("embedding does not match the algebras".into()));
    }
    let mut map = std::collections::BTreeMap::new();
    for id in phi.names() {
        if !sub.store.contains(id) {
            return Err(EvalError::UnknownName(id));
        }
        map.insert(id, sup.store.transport(&sub.store, id, emb));
    }
    let lifted = phi.map_names(&|id| map[&id]);
    let (s_opt, p_opt) = (sub.bounded_opt, sup.bounded_opt);
    sub.bounded_opt = true;
    sup.bounded_opt = true;
    let sub_value = value(sub, phi);
    let sup_value = value(sup, &lifted);
    sub.bounded_opt = s_opt;
    sup.bounded_opt = p_opt;
    let sub_value = sub_value?;
    Ok(AbsolutenessReport {
        formula: phi.clone(),
        sub_value,
        sup_value: sup_value?,
        image: emb[sub_value],
    })
}

/// Truth of a restricted negation-free formula among hereditarily finite
/// sets, with free variables bound by `env`.
pub fn hf_holds(phi: &Formula, env: &mut Vec<(String, HFSet)>) -> Result<bool, EvalError> {
    fn lookup(t: &Term, env: &[(String, HFSet)]) -> Result<HFSet, EvalError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| EvalError::FreeVariable(x.clone())),
            _ => Err(EvalError::UnsupportedAtom(t.to_string())),
        }
    }
    match phi {
        Formula::Bot => Ok(false),
        Formula::Atom(Atom::Mem(a, b)) => Ok(lookup(b, env)?.contains(&lookup(a, env)?)),
        Formula::Atom(Atom::Eq(a, b)) => Ok(lookup(a, env)? == lookup(b, env)?),
        Formula::Atom(a) => Err(EvalError::UnsupportedAtom(a.to_string())),
        Formula::And(a, b) => Ok(hf_holds(a, env)? && hf_holds(b, env)?),
        Formula::Or(a, b) => Ok(hf_holds(a, env)? || hf_holds(b, env)?),
        Formula::Imp(a, b) => Ok(!hf_holds(a, env)? || hf_holds(b, env)?),
        Formula::Neg(_) => Err(EvalError::NotNegationFree(phi.to_string())),
        Formula::Forall(..) | Formula::Exists(..) => {
            let universal = matches!(phi, Formula::Forall(..));
            let bounded = if universal { phi.as_bounded_forall() } else { phi.as_bounded_exists() };
            let (x, t, body) = bounded.ok_or_else(|| EvalError::NotRestricted(phi.to_string()))?;
            let members: Vec<HFSet> = lookup(t, env)?.members().cloned().collect();
            for m in members {
                env.push((x.to_string(), m));
                let r = hf_holds(body, env);
                env.pop();
                if r? != universal {
                    return Ok(!universal);
                }
            }
            Ok(universal)
        }
    }
}

/// `∅ ∈ x ∧ ∀y∈x (y ∪ {y} ∈ x)`, written with bounded quantifiers only.
pub fn infinity_formula() -> Formula {
    let empty_in_x = Formula::exists_in("e", var("x"), Formula::forall_in("t", var("e"), Formula::Bot));
    // s = y ∪ {y}: y ∈ s, y ⊆ s, and every member of s is in y or equals y.
    let successor = Formula::and(
        Formula::mem(var("y"), var("s")),
        Formula::and(
            Formula::forall_in("t", var("y"), Formula::mem(var("t"), var("s"))),
            Formula::forall_in(
                "t",
                var("s"),
                Formula::or(Formula::mem(var("t"), var("y")), Formula::eq(var("t"), var("y"))),
            ),
        ),
    );
    Formula::and(
        empty_in_x,
        Formula::forall_in("y", var("x"), Formula::exists_in("s", var("x"), successor)),
    )
}

/// Restricted negation-free formulas used to test transfer along the hat
/// embedding, each with free variables among `x`, `y`.
pub fn hat_formulas() -> Vec<Formula> {
    vec![
        Formula::mem(var("x"), var("y")),
        Formula::eq(var("x"), var("y")),
        Formula::forall_in("z", var("x"), Formula::mem(var("z"), var("y"))),
        Formula::exists_in("z", var("y"), Formula::mem(var("x"), var("z"))),
        Formula::exists_in("z", var("y"), Formula::forall_in("w", var("z"), Formula::Bot)),
        Formula::forall_in("z", var("x"), Formula::exists_in("w", var("y"), Formula::eq(var("z"), var("w")))),
        Formula::or(Formula::mem(var("x"), var("y")), Formula::mem(var("y"), var("x"))),
        Formula::imp(Formula::mem(var("x"), var("y")), Formula::exists_in("z", var("y"), Formula::eq(var("z"), var("x")))),
        infinity_formula(),
    ]
}

/// Clauses of the hat-embedding lemma over HF sets of rank at most
/// `max_rank`:
/// (i) `||u ∈ v̂|| = ⋁_{x∈v} ||u ≈ x̂||` for names `u` of rank ≤ 2 in scope;
/// (ii) `a ∈ b` iff `||â ∈ b̂|| = top`, and `a = b` iff `||â ≈ b̂|| = top`;
/// (iv) each formula in `formulas` holds of HF arguments iff its value at
/// their hats is top.
pub fn check_hat_lemma(model: &mut SetModel, max_rank: usize, formulas: &[Formula]) -> Result<LemmaReport, EvalError> {
    if !matches!(model.mode, Mode::Boolean | Mode::Heyting) {
        return Err(EvalError::ModeMismatch("the hat lemma is checked in boolean or heyting mode".into()));
    }
    let mut r = LemmaReport::new("hat embedding");
    let sets = HFSet::all_up_to_rank(max_rank);
    let hats: Vec<NameId> = sets
        .iter()
        .map(|s| hat_embed(s, &mut model.store, &model.algebra))
        .collect();
    let hat_of = |s: &HFSet| hats[sets.iter().position(|t| t == s).expect("member sets have lower rank")];
    let top = model.algebra.top();
    for u in model.names_up_to(2) {
        for (v, &vh) in sets.iter().zip(&hats) {
            let lhs = model.mem(u, vh);
            let members: Vec<NameId> = v.members().map(&hat_of).collect();
            let eqs: Vec<Elem> = members.iter().map(|&x| model.eq(u, x)).collect();
            let rhs = model.algebra.join_all(eqs);
            r.expect(lhs == rhs, || format!("(i) u={u}, v={v}: {lhs} vs {rhs}"));
        }
    }
    for (a, &ah) in sets.iter().zip(&hats) {
        for (b, &bh) in sets.iter().zip(&hats) {
            let m = model.mem(ah, bh);
            r.expect(b.contains(a) == (m == top), || format!("(ii) {a} ∈ {b}: value {m}"));
            let e = model.eq(ah, bh);
            r.expect((a == b) == (e == top), || format!("(ii) {a} = {b}: value {e}"));
        }
    }
    let saved = model.bounded_opt;
    model.bounded_opt = true;
    let result = (|| {
        for psi in formulas {
            let vars: Vec<String> = psi.free_vars().into_iter().collect();
            let combos = sets.len().pow(vars.len() as u32);
            for mut i in 0..combos {
                let mut env = Vec::new();
                let mut closed = psi.clone();
                for x in &vars {
                    let k = i % sets.len();
                    i /= sets.len();
                    env.push((x.clone(), sets[k].clone()));
                    closed = closed.instantiate(x, hats[k]);
                }
                let meta = hf_holds(psi, &mut env)?;
                let v = value(model, &closed)?;
                r.expect(meta == (v == top), || format!("(iv) {psi} at {env:?}: meta {meta}, value {v}"));
            }
        }
        Ok(())
    })();
    model.bounded_opt = saved;
    result.map(|()| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HeytingAlgebra;
    use crate::fidel::{saturate, Kind};
    use crate::universe::Policy;

    fn heyting(h: HeytingAlgebra, rank: usize) -> SetModel {
        SetModel::heyting(h, rank, Policy::Full).unwrap()
    }

    #[test]
    fn equality_laws_hold() {
        let mut m = heyting(HeytingAlgebra::chain(3), 2);
        let r = check_equality_laws(&mut m, 2);
        assert!(r.holds(), "{r}");
        assert_eq!(r.checked, 4 + 3 + 16);
    }

    #[test]
    fn bounded_quantifiers_agree() {
        let mut m = SetModel::with_structure(saturate(&HeytingAlgebra::chain(3), Kind::Comega), 2, Policy::Full).unwrap();
        let fam = formula_family(&m.scope.clone());
        let r = check_bounded_quantifiers(&mut m, &fam, 2).unwrap();
        assert!(r.holds(), "{r}");
    }

    #[test]
    fn mixing_lemma_small() {
        let mut m = heyting(HeytingAlgebra::chain(3), 2);
        let r = check_mixing_lemma(&mut m, 2, 2).unwrap();
        assert!(r.holds(), "{r}");
        assert!(r.checked > 0);
    }

    #[test]
    fn maximum_principle_witnesses() {
        let mut m = heyting(HeytingAlgebra::chain(2), 2);
        let psi = Formula::mem(name(NameId::EMPTY), var("x"));
        let r = check_maximum_principle(&mut m, &psi).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(m.store.entries(w), &[(NameId::EMPTY, 1)]);
        for u in m.scope.clone() {
            let r = check_maximum_principle(&mut m, &Formula::eq(var("x"), name(u))).unwrap();
            // The first witness in scope may be a different but equal name.
            assert_eq!(m.eq(r.witness.unwrap(), u), 1);
        }
    }

    #[test]
    fn maximum_principle_needs_refinable_algebra() {
        // 0 < d < a, b < top: a and b overlap in d, so {a, b} has no
        // disjoint refinement with join top.
        let leq: Vec<Vec<bool>> = (0..5)
            .map(|x| (0..5).map(|y| x == y || x == 0 || y == 4 || (x == 1 && (y == 2 || y == 3))).collect())
            .collect();
        let h = HeytingAlgebra::from_leq(&leq).unwrap();
        let mut m = heyting(h, 1);
        let err = check_maximum_principle(&mut m, &Formula::eq(var("x"), var("x"))).unwrap_err();
        assert_eq!(err, EvalError::NotRefinable);
    }

    #[test]
    fn absoluteness_for_two_in_four() {
        let mut sub = heyting(HeytingAlgebra::chain(2), 2);
        let mut sup = heyting(HeytingAlgebra::powerset(2), 2);
        let names = sub.scope.clone();
        for &u in &names {
            for &v in &names {
                let phi = Formula::forall_in("y", name(u), Formula::mem(var("y"), name(v)));
                let r = check_subalgebra_absolute(&phi, &mut sub, &mut sup, &[0, 3]).unwrap();
                assert!(r.equal(), "{r:?}");
                let r = check_subalgebra_absolute(&Formula::eq(name(u), name(v)), &mut sub, &mut sup, &[0, 3]).unwrap();
                assert!(r.equal());
            }
        }
        let unbounded = Formula::forall("y", Formula::mem(var("y"), name(names[0])));
        assert!(matches!(
            check_subalgebra_absolute(&unbounded, &mut sub, &mut sup, &[0, 3]),
            Err(EvalError::NotRestricted(_))
        ));
    }

    #[test]
    fn hf_meta_evaluation() {
        let e = HFSet::empty();
        let one = HFSet::of([e.clone()]);
        let two = HFSet::of([e.clone(), one.clone()]);
        let mut env = vec![("x".to_string(), e.clone()), ("y".to_string(), one.clone())];
        assert!(hf_holds(&Formula::mem(var("x"), var("y")), &mut env).unwrap());
        let mut env = vec![("x".to_string(), one.clone()), ("y".to_string(), two.clone())];
        assert!(hf_holds(&hat_formulas()[2], &mut env).unwrap());
        // {∅, {∅}} is closed under successor only up to its largest member.
        let mut env = vec![("x".to_string(), two)];
        assert!(!hf_holds(&infinity_formula(), &mut env).unwrap());
    }

    #[test]
    fn hat_lemma_rank_three() {
        for h in [HeytingAlgebra::chain(2), HeytingAlgebra::chain(3)] {
            let mut m = heyting(h, 2);
            let r = check_hat_lemma(&mut m, 3, &hat_formulas()).unwrap();
            assert!(r.holds(), "{r}");
        }
    }
}
