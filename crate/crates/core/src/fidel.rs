//! Fidel structures: an algebra together with, for each element `x`, the set
//! `N_x` of values a negation of something valued `x` may take.

use std::fmt;

use thiserror::Error;

use crate::algebra::{Elem, HeytingAlgebra};

/// Largest algebra for which [`enumerate_structures`] tries every family.
pub const STRUCTURE_ENUMERATION_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Comega,
    N4,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Comega => "comega",
            Kind::N4 => "n4",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "comega" | "qcw" | "cw" => Ok(Kind::Comega),
            "n4" | "qn4" => Ok(Kind::N4),
            other => Err(format!("unknown structure kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FidelError {
    #[error("expected {expected} negation sets, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("negation value {value} for element {x} is not an element")]
    OutOfRange { x: Elem, value: Elem },
    #[error("N_{0} is empty")]
    EmptyNegSet(Elem),
    #[error("clause (ii) `{which}` fails at x={x}, y={y}, x'={xp}, y'={yp}")]
    ClauseII {
        x: Elem,
        y: Elem,
        xp: Elem,
        yp: Elem,
        which: &'static str,
    },
    #[error("clause (iii) fails at x={x}, y={y}, y'={yp}: x∧y' ∉ N_(x→y)")]
    ClauseIII { x: Elem, y: Elem, yp: Elem },
    #[error("x ∨ x' ≠ top at x={0}, x'={1}")]
    LemFails(Elem, Elem),
    #[error("no x'' ∈ N_{1} below x={0}")]
    NoDoubleNegWitness(Elem, Elem),
    #[error("x ∧ x' ≠ bottom at x={0}, x'={1}")]
    ExplosionFails(Elem, Elem),
    #[error("structure enumeration over {size} elements exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

/// An algebra with its family `{N_x}` of admissible negation values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FStructure {
    algebra: HeytingAlgebra,
    negs: Vec<Vec<Elem>>,
    kind: Kind,
}

impl FStructure {
    /// Assembles a structure without checking any clause beyond shape.
    /// Sets are sorted and deduplicated.
    pub fn unchecked(
        algebra: HeytingAlgebra,
        mut negs: Vec<Vec<Elem>>,
        kind: Kind,
    ) -> Result<Self, FidelError> {
        if negs.len() != algebra.size() {
            return Err(FidelError::WrongArity {
                expected: algebra.size(),
                got: negs.len(),
            });
        }
        for (x, set) in negs.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if let Some(&v) = set.iter().find(|&&v| v >= algebra.size()) {
                return Err(FidelError::OutOfRange { x, value: v });
            }
        }
        Ok(FStructure {
            algebra,
            negs,
            kind,
        })
    }

    pub fn algebra(&self) -> &HeytingAlgebra {
        &self.algebra
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    /// `N_x`, sorted ascending.
    pub fn negs(&self, x: Elem) -> &[Elem] {
        &self.negs[x]
    }

    pub fn families(&self) -> &[Vec<Elem>] {
        &self.negs
    }

    pub fn admits(&self, x: Elem, value: Elem) -> bool {
        self.negs[x].binary_search(&value).is_ok()
    }

    /// True iff every `N_x` is a singleton, i.e. negation is a function.
    pub fn is_functional(&self) -> bool {
        self.negs.iter().all(|s| s.len() == 1)
    }
}

impl fmt::Display for FStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind={} size={}", self.kind.as_str(), self.algebra.size())?;
        for (x, set) in self.negs.iter().enumerate() {
            let vals: Vec<String> = set.iter().map(|v| v.to_string()).collect();
            writeln!(f, "N {x}: {}", vals.join(" "))?;
        }
        Ok(())
    }
}

fn check_nonempty(s: &FStructure) -> Result<(), FidelError> {
    match s.negs.iter().position(|set| set.is_empty()) {
        Some(x) => Err(FidelError::EmptyNegSet(x)),
        None => Ok(()),
    }
}

/// Checks the N4-structure clauses (i)-(iii).
///
/// (ii) for `x' ∈ N_x`, `y' ∈ N_y`: `x'∨y' ∈ N_(x∧y)`, `x'∧y' ∈ N_(x∨y)`, `x ∈ N_x'`.
/// (iii) for `y' ∈ N_y`: `x∧y' ∈ N_(x→y)`.
pub fn validate_n4(algebra: HeytingAlgebra, negs: Vec<Vec<Elem>>) -> Result<FStructure, FidelError> {
    let s = FStructure::unchecked(algebra, negs, Kind::N4)?;
    check_n4_clauses(&s)?;
    Ok(s)
}

fn check_n4_clauses(s: &FStructure) -> Result<(), FidelError> {
    check_nonempty(s)?;
    let a = &s.algebra;
    for x in a.elements() {
        for &xp in s.negs(x) {
            if !s.admits(xp, x) {
                return Err(FidelError::ClauseII {
                    x,
                    y: x,
                    xp,
                    yp: xp,
                    which: "x ∈ N_x'",
                });
            }
        }
    }
    for x in a.elements() {
        for y in a.elements() {
            for &xp in s.negs(x) {
                for &yp in s.negs(y) {
                    if !s.admits(a.meet(x, y), a.join(xp, yp)) {
                        return Err(FidelError::ClauseII {
                            x,
                            y,
                            xp,
                            yp,
                            which: "x'∨y' ∈ N_(x∧y)",
                        });
                    }
                    if !s.admits(a.join(x, y), a.meet(xp, yp)) {
                        return Err(FidelError::ClauseII {
                            x,
                            y,
                            xp,
                            yp,
                            which: "x'∧y' ∈ N_(x∨y)",
                        });
                    }
                }
            }
        }
    }
    for x in a.elements() {
        for y in a.elements() {
            for &yp in s.negs(y) {
                if !s.admits(a.imp(x, y), a.meet(x, yp)) {
                    return Err(FidelError::ClauseIII { x, y, yp });
                }
            }
        }
    }
    Ok(())
}

/// N4 clauses plus `x ∧ x' = 0`, which makes `~a → (a → b)` sound.
pub fn validate_n3(algebra: HeytingAlgebra, negs: Vec<Vec<Elem>>) -> Result<FStructure, FidelError> {
    let s = validate_n4(algebra, negs)?;
    check_explosion(&s)?;
    Ok(s)
}

/// Checks `x ∧ x' = 0` for every admissible negation value.
pub fn check_explosion(s: &FStructure) -> Result<(), FidelError> {
    let a = &s.algebra;
    for x in a.elements() {
        for &xp in s.negs(x) {
            if a.meet(x, xp) != a.bottom() {
                return Err(FidelError::ExplosionFails(x, xp));
            }
        }
    }
    Ok(())
}

/// Accepts iff every `N_x` is nonempty, `x ∨ x' = 1` for `x' ∈ N_x`, and
/// every `x' ∈ N_x` has some `x'' ∈ N_x'` with `x'' ≤ x`.
pub fn validate_comega(
    algebra: HeytingAlgebra,
    negs: Vec<Vec<Elem>>,
) -> Result<FStructure, FidelError> {
    let s = FStructure::unchecked(algebra, negs, Kind::Comega)?;
    check_comega_clauses(&s)?;
    Ok(s)
}

fn check_comega_clauses(s: &FStructure) -> Result<(), FidelError> {
    check_nonempty(s)?;
    let a = &s.algebra;
    for x in a.elements() {
        for &xp in s.negs(x) {
            if a.join(x, xp) != a.top() {
                return Err(FidelError::LemFails(x, xp));
            }
        }
    }
    for x in a.elements() {
        for &xp in s.negs(x) {
            if !s.negs(xp).iter().any(|&xpp| a.leq(xpp, x)) {
                return Err(FidelError::NoDoubleNegWitness(x, xp));
            }
        }
    }
    Ok(())
}

/// Re-checks a structure against the clauses of its own kind.
pub fn validate(s: &FStructure) -> Result<(), FidelError> {
    match s.kind {
        Kind::N4 => check_n4_clauses(s),
        Kind::Comega => check_comega_clauses(s),
    }
}

/// `N_x = { y : x ∨ y = 1 }`.
pub fn saturate(algebra: &HeytingAlgebra, kind: Kind) -> FStructure {
    let negs = algebra
        .elements()
        .map(|x| {
            algebra
                .elements()
                .filter(|&y| algebra.join(x, y) == algebra.top())
                .collect()
        })
        .collect();
    FStructure {
        algebra: algebra.clone(),
        negs,
        kind,
    }
}

/// `1 ∈ N_x` for every `x ≠ 1`, and `0 ∈ N_1`.
pub fn is_leibniz_comega(f: &FStructure) -> bool {
    let a = &f.algebra;
    a.elements()
        .filter(|&x| x != a.top())
        .all(|x| f.admits(x, a.top()))
        && f.admits(a.top(), a.bottom())
}

/// All injective maps `a → b` preserving meet, join, implication, top and bottom.
pub fn algebra_embeddings(a: &HeytingAlgebra, b: &HeytingAlgebra) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    if a.size() > b.size() {
        return out;
    }
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; b.size()];
    extend_embedding(a, b, 0, &mut map, &mut used, &mut |m| {
        out.push(m.to_vec());
        false
    });
    out
}

/// Calls `visit` on each embedding until it returns true.
fn extend_embedding(
    a: &HeytingAlgebra,
    b: &HeytingAlgebra,
    next: usize,
    map: &mut Vec<Elem>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[Elem]) -> bool,
) -> bool {
    if next == a.size() {
        let ok = a.elements().all(|x| {
            a.elements().all(|y| {
                map[a.meet(x, y)] == b.meet(map[x], map[y])
                    && map[a.join(x, y)] == b.join(map[x], map[y])
                    && map[a.imp(x, y)] == b.imp(map[x], map[y])
            })
        }) && map[a.top()] == b.top()
            && map[a.bottom()] == b.bottom();
        return ok && visit(map);
    }
    for target in b.elements() {
        if used[target] {
            continue;
        }
        if next == a.top() && target != b.top() || next == a.bottom() && target != b.bottom() {
            continue;
        }
        // Order must be reflected both ways against already-placed elements.
        let consistent = (0..next).all(|prev| {
            a.leq(prev, next) == b.leq(map[prev], target) && a.leq(next, prev) == b.leq(target, map[prev])
        });
        if !consistent {
            continue;
        }
        map[next] = target;
        used[target] = true;
        if extend_embedding(a, b, next + 1, map, used, visit) {
            return true;
        }
        used[target] = false;
        map[next] = usize::MAX;
    }
    false
}

/// Searches an embedding of `f`'s algebra into `g`'s under which each `N_x`
/// lands inside `N'_(image x)`. Returns the embedding as certificate.
pub fn is_substructure(f: &FStructure, g: &FStructure) -> Option<Vec<Elem>> {
    let (a, b) = (&f.algebra, &g.algebra);
    if a.size() > b.size() {
        return None;
    }
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; b.size()];
    let mut found = None;
    extend_embedding(a, b, 0, &mut map, &mut used, &mut |m| {
        let fits = a
            .elements()
            .all(|x| f.negs(x).iter().all(|&xp| g.admits(m[x], m[xp])));
        if fits {
            found = Some(m.to_vec());
        }
        fits
    });
    found
}

/// Every family `{N_x}` over `algebra` passing the clauses of `kind`, in
/// lexicographic order of the per-element bitmasks.
pub fn enumerate_structures(
    algebra: &HeytingAlgebra,
    kind: Kind,
    explosive: bool,
) -> Result<Vec<FStructure>, FidelError> {
    let m = algebra.size();
    if m > STRUCTURE_ENUMERATION_CAP {
        return Err(FidelError::CapExceeded {
            size: m,
            cap: STRUCTURE_ENUMERATION_CAP,
        });
    }
    let per = (1usize << m) - 1;
    let total = per.pow(m as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut negs = Vec::with_capacity(m);
        let mut masks = vec![0usize; m];
        for slot in masks.iter_mut().rev() {
            *slot = rest % per + 1;
            rest /= per;
        }
        for mask in &masks {
            negs.push((0..m).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>());
        }
        let s = FStructure {
            algebra: algebra.clone(),
            negs,
            kind,
        };
        if validate(&s).is_ok() && (!explosive || check_explosion(&s).is_ok()) {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> HeytingAlgebra {
        HeytingAlgebra::chain(3)
    }

    #[test]
    fn saturated_boolean_two() {
        let s = saturate(&HeytingAlgebra::chain(2), Kind::N4);
        assert_eq!(s.negs(0), &[1]);
        assert_eq!(s.negs(1), &[0, 1]);
        assert!(validate_n4(HeytingAlgebra::chain(2), vec![vec![1], vec![0, 1]]).is_ok());
    }

    #[test]
    fn saturated_three_chain_sets() {
        let s = saturate(&chain3(), Kind::N4);
        assert_eq!(s.families(), &[vec![2], vec![2], vec![0, 1, 2]]);
        let one = saturate(&HeytingAlgebra::chain(1), Kind::N4);
        assert_eq!(one.families(), &[vec![0]]);
    }

    #[test]
    fn saturated_three_chain_violates_clause_three() {
        // x = a, y = 0, y' = 1 ∈ N_0: x ∧ y' = a but N_(a→0) = N_0 = {1}.
        let err = validate_n4(chain3(), vec![vec![2], vec![2], vec![0, 1, 2]]).unwrap_err();
        assert_eq!(err, FidelError::ClauseIII { x: 1, y: 0, yp: 2 });
    }

    #[test]
    fn empty_negation_set_rejected() {
        let err = validate_n4(HeytingAlgebra::chain(2), vec![vec![1], vec![]]).unwrap_err();
        assert_eq!(err, FidelError::EmptyNegSet(1));
    }

    #[test]
    fn full_family_is_n4() {
        let all: Vec<Vec<Elem>> = (0..3).map(|_| vec![0, 1, 2]).collect();
        assert!(validate_n4(chain3(), all).is_ok());
    }

    #[test]
    fn comega_checks() {
        assert!(validate_comega(chain3(), vec![vec![2], vec![2], vec![0, 1, 2]]).is_ok());
        assert_eq!(
            validate_comega(chain3(), vec![vec![2], vec![1], vec![0, 1, 2]]).unwrap_err(),
            FidelError::LemFails(1, 1)
        );
        assert!(validate_comega(HeytingAlgebra::chain(1), vec![vec![0]]).is_ok());
        // N_2 = {1}: nothing in N_2 lies below 0.
        assert_eq!(
            validate_comega(chain3(), vec![vec![2], vec![2], vec![1]]).unwrap_err(),
            FidelError::NoDoubleNegWitness(0, 2)
        );
    }

    #[test]
    fn leibniz_condition() {
        assert!(is_leibniz_comega(&saturate(&chain3(), Kind::Comega)));
        let s = FStructure::unchecked(HeytingAlgebra::chain(2), vec![vec![1], vec![1]], Kind::Comega)
            .unwrap();
        assert!(!is_leibniz_comega(&s));
        assert!(is_leibniz_comega(&saturate(&HeytingAlgebra::chain(1), Kind::Comega)));
    }

    #[test]
    fn substructure_cases() {
        let full = FStructure::unchecked(chain3(), vec![vec![0, 1, 2]; 3], Kind::N4).unwrap();
        let sat = saturate(&chain3(), Kind::N4);
        assert_eq!(is_substructure(&sat, &full), Some(vec![0, 1, 2]));
        assert_eq!(is_substructure(&sat, &sat), Some(vec![0, 1, 2]));
        assert_eq!(is_substructure(&sat, &saturate(&HeytingAlgebra::chain(2), Kind::N4)), None);
    }

    #[test]
    fn boolean_two_embeds_in_boolean_four_two_ways_up_to_labels() {
        let emb = algebra_embeddings(&HeytingAlgebra::chain(2), &HeytingAlgebra::powerset(2));
        assert_eq!(emb, vec![vec![0, 3]]);
        // The 3-chain is not a Heyting subalgebra of the 4-element Boolean algebra.
        assert!(algebra_embeddings(&chain3(), &HeytingAlgebra::powerset(2)).is_empty());
    }

    #[test]
    fn n4_structures_over_boolean_two() {
        let all = enumerate_structures(&HeytingAlgebra::chain(2), Kind::N4, false).unwrap();
        assert!(all.iter().any(|s| s.families() == [vec![1], vec![0, 1]]));
        for s in &all {
            assert!(validate(s).is_ok());
        }
    }
}
