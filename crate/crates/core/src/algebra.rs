//! Finite bounded lattices and the Heyting algebras they carry.
//!
//! Elements are dense indices `0..size`. Every table is computed once at
//! construction, so `meet`, `join` and `imp` are single lookups.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// An element of a finite algebra, as a dense index.
pub type Elem = usize;

/// Hard ceiling for [`enumerate_heyting`].
pub const ENUMERATION_CAP: usize = 7;
/// Hard ceiling for [`check_refinable`] (subset enumeration is `2^size`).
pub const REFINABLE_CAP: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("relation is not square or is empty")]
    Malformed,
    #[error("not a partial order: {property} fails at ({}, {})", pair.0, pair.1)]
    NotAPoset {
        property: &'static str,
        pair: (Elem, Elem),
    },
    #[error("elements {0} and {1} have no meet")]
    NoMeet(Elem, Elem),
    #[error("elements {0} and {1} have no join")]
    NoJoin(Elem, Elem),
    #[error("lattice has no top or no bottom")]
    NotBounded,
    #[error("distributivity fails at ({0}, {1}, {2})")]
    NotDistributive(Elem, Elem, Elem),
    #[error("size {requested} exceeds the cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },
}

/// A finite lattice given by its order relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteLattice {
    size: usize,
    leq: Vec<bool>,
    meet: Vec<Elem>,
    join: Vec<Elem>,
    top: Elem,
    bottom: Elem,
}

impl FiniteLattice {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.leq[x * self.size + y]
    }

    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.meet[x * self.size + y]
    }

    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.join[x * self.size + y]
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size
    }

    /// The order relation as a row-major boolean matrix.
    pub fn leq_matrix(&self) -> Vec<Vec<bool>> {
        self.elements()
            .map(|i| self.elements().map(|j| self.leq(i, j)).collect())
            .collect()
    }
}

/// Builds a lattice from an order relation, deriving meet, join, top and bottom.
///
/// Checks run in a fixed order: poset axioms, then joins, then meets, so the
/// diagnostic names the first failing property.
pub fn validate_lattice(leq: &[Vec<bool>]) -> Result<FiniteLattice, AlgebraError> {
    let size = leq.len();
    if size == 0 {
        return Err(AlgebraError::NotBounded);
    }
    if leq.iter().any(|row| row.len() != size) {
        return Err(AlgebraError::Malformed);
    }
    let rel = |i: usize, j: usize| leq[i][j];
    for i in 0..size {
        if !rel(i, i) {
            return Err(AlgebraError::NotAPoset {
                property: "reflexivity",
                pair: (i, i),
            });
        }
    }
    for i in 0..size {
        for j in 0..size {
            if i != j && rel(i, j) && rel(j, i) {
                return Err(AlgebraError::NotAPoset {
                    property: "antisymmetry",
                    pair: (i, j),
                });
            }
        }
    }
    for i in 0..size {
        for j in 0..size {
            if !rel(i, j) {
                continue;
            }
            for k in 0..size {
                if rel(j, k) && !rel(i, k) {
                    return Err(AlgebraError::NotAPoset {
                        property: "transitivity",
                        pair: (i, k),
                    });
                }
            }
        }
    }

    let mut join = vec![0; size * size];
    for x in 0..size {
        for y in 0..size {
            let uppers: Vec<usize> = (0..size).filter(|&z| rel(x, z) && rel(y, z)).collect();
            let least = uppers
                .iter()
                .copied()
                .find(|&z| uppers.iter().all(|&w| rel(z, w)))
                .ok_or(AlgebraError::NoJoin(x, y))?;
            join[x * size + y] = least;
        }
    }
    let mut meet = vec![0; size * size];
    for x in 0..size {
        for y in 0..size {
            let lowers: Vec<usize> = (0..size).filter(|&z| rel(z, x) && rel(z, y)).collect();
            let greatest = lowers
                .iter()
                .copied()
                .find(|&z| lowers.iter().all(|&w| rel(w, z)))
                .ok_or(AlgebraError::NoMeet(x, y))?;
            meet[x * size + y] = greatest;
        }
    }
    let top = (0..size)
        .find(|&t| (0..size).all(|x| rel(x, t)))
        .ok_or(AlgebraError::NotBounded)?;
    let bottom = (0..size)
        .find(|&b| (0..size).all(|x| rel(b, x)))
        .ok_or(AlgebraError::NotBounded)?;
    Ok(FiniteLattice {
        size,
        leq: leq.iter().flatten().copied().collect(),
        meet,
        join,
        top,
        bottom,
    })
}

/// A finite Heyting algebra: a distributive lattice with its implication table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeytingAlgebra {
    lattice: FiniteLattice,
    imp: Vec<Elem>,
    boolean: bool,
}

/// Computes the relative pseudo-complement table, failing on non-distributive input.
pub fn derive_heyting(lattice: FiniteLattice) -> Result<HeytingAlgebra, AlgebraError> {
    let n = lattice.size();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let lhs = lattice.meet(x, lattice.join(y, z));
                let rhs = lattice.join(lattice.meet(x, y), lattice.meet(x, z));
                if lhs != rhs {
                    return Err(AlgebraError::NotDistributive(x, y, z));
                }
            }
        }
    }
    let mut imp = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            let candidate = (0..n)
                .filter(|&z| lattice.leq(lattice.meet(x, z), y))
                .fold(lattice.bottom(), |acc, z| lattice.join(acc, z));
            // The join of all admissible z must itself be admissible.
            if !lattice.leq(lattice.meet(x, candidate), y) {
                return Err(AlgebraError::NotDistributive(x, y, candidate));
            }
            imp[x * n + y] = candidate;
        }
    }
    let mut algebra = HeytingAlgebra {
        lattice,
        imp,
        boolean: false,
    };
    algebra.boolean = algebra
        .elements()
        .all(|x| algebra.join(x, algebra.pseudo_complement(x)) == algebra.top());
    Ok(algebra)
}

impl HeytingAlgebra {
    /// Parses an order relation and derives the algebra in one step.
    pub fn from_leq(leq: &[Vec<bool>]) -> Result<Self, AlgebraError> {
        derive_heyting(validate_lattice(leq)?)
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1, "a chain needs at least one element");
        let leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        Self::from_leq(&leq).expect("chains are Heyting algebras")
    }

    /// The Boolean algebra of subsets of a `k`-element set; element `i` is the bitmask `i`.
    pub fn powerset(k: u32) -> Self {
        let n = 1usize << k;
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i & j == i).collect())
            .collect();
        Self::from_leq(&leq).expect("powersets are Boolean algebras")
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn size(&self) -> usize {
        self.lattice.size
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        self.lattice.elements()
    }

    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.lattice.leq(x, y)
    }

    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.lattice.meet(x, y)
    }

    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.lattice.join(x, y)
    }

    /// `x → y`, the greatest `z` with `x ∧ z ≤ y`.
    pub fn imp(&self, x: Elem, y: Elem) -> Elem {
        self.imp[x * self.lattice.size + y]
    }

    /// `x ↔ y` as `(x → y) ∧ (y → x)`.
    pub fn iff(&self, x: Elem, y: Elem) -> Elem {
        self.meet(self.imp(x, y), self.imp(y, x))
    }

    pub fn pseudo_complement(&self, x: Elem) -> Elem {
        self.imp(x, self.bottom())
    }

    pub fn top(&self) -> Elem {
        self.lattice.top
    }

    pub fn bottom(&self) -> Elem {
        self.lattice.bottom
    }

    pub fn is_boolean(&self) -> bool {
        self.boolean
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = Elem>) -> Elem {
        xs.into_iter().fold(self.top(), |acc, x| self.meet(acc, x))
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = Elem>) -> Elem {
        xs.into_iter().fold(self.bottom(), |acc, x| self.join(acc, x))
    }

    /// Elements strictly below `top`, for reports.
    pub fn describe(&self, x: Elem) -> String {
        if x == self.top() {
            format!("{x}(top)")
        } else if x == self.bottom() {
            format!("{x}(bot)")
        } else {
            x.to_string()
        }
    }
}

/// True iff every element has a complement, i.e. `x ∨ (x → 0) = 1` everywhere.
pub fn is_boolean(h: &HeytingAlgebra) -> bool {
    h.is_boolean()
}

impl fmt::Display for HeytingAlgebra {
    /// Renders the order and the implication table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "size {} top {} bottom {} boolean {}",
            self.size(),
            self.top(),
            self.bottom(),
            self.is_boolean()
        )?;
        writeln!(f, "leq")?;
        for i in self.elements() {
            let row: String = self
                .elements()
                .map(|j| if self.leq(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        writeln!(f, "imp (row x, column y = x -> y)")?;
        for x in self.elements() {
            let row: Vec<String> = self.elements().map(|y| self.imp(x, y).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Canonical code of a lattice: the largest strict-order bitstring over all
/// relabelings that are linear extensions. Two lattices are isomorphic iff
/// their sizes and codes agree.
pub fn canonical_code(lattice: &FiniteLattice) -> u64 {
    canonical_labeling(lattice).0
}

/// Returns the canonical code and the permutation `position -> original element`.
fn canonical_labeling(lattice: &FiniteLattice) -> (u64, Vec<Elem>) {
    let n = lattice.size();
    let mut best: Option<(u64, Vec<Elem>)> = None;
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    extensions(lattice, &mut order, &mut placed, &mut best);
    best.expect("every finite poset has a linear extension")
}

fn extensions(
    lattice: &FiniteLattice,
    order: &mut Vec<Elem>,
    placed: &mut Vec<bool>,
    best: &mut Option<(u64, Vec<Elem>)>,
) {
    let n = lattice.size();
    if order.len() == n {
        let mut code = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                code = (code << 1) | u64::from(lattice.leq(order[i], order[j]));
            }
        }
        if best.as_ref().is_none_or(|(c, _)| code > *c) {
            *best = Some((code, order.clone()));
        }
        return;
    }
    for e in 0..n {
        if placed[e] {
            continue;
        }
        let ready = (0..n).all(|d| d == e || !lattice.leq(d, e) || placed[d]);
        if ready {
            placed[e] = true;
            order.push(e);
            extensions(lattice, order, placed, best);
            order.pop();
            placed[e] = false;
        }
    }
}

pub fn is_isomorphic(a: &FiniteLattice, b: &FiniteLattice) -> bool {
    a.size() == b.size() && canonical_code(a) == canonical_code(b)
}

/// All finite distributive lattices with at most `max_size` elements, up to
/// isomorphism, each with its implication table.
///
/// Lattices are produced as the down-set lattices of finite posets, then
/// deduplicated by canonical code. Order: ascending size, then descending code.
pub fn enumerate_heyting(max_size: usize) -> Result<Vec<HeytingAlgebra>, AlgebraError> {
    if max_size > ENUMERATION_CAP {
        return Err(AlgebraError::CapExceeded {
            requested: max_size,
            cap: ENUMERATION_CAP,
        });
    }
    if max_size == 0 {
        return Ok(Vec::new());
    }
    let mut seen: BTreeSet<(usize, std::cmp::Reverse<u64>)> = BTreeSet::new();
    let mut found: Vec<(usize, std::cmp::Reverse<u64>, FiniteLattice)> = Vec::new();
    for k in 0..max_size {
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .collect();
        for mask in 0u64..(1u64 << pairs.len()) {
            let mut below = vec![vec![false; k]; k];
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    below[i][j] = true;
                }
            }
            let transitive = (0..k).all(|i| {
                (0..k).all(|j| !below[i][j] || (0..k).all(|l| !below[j][l] || below[i][l]))
            });
            if !transitive {
                continue;
            }
            let downsets: Vec<u32> = (0u32..(1u32 << k))
                .filter(|&d| {
                    (0..k).all(|j| {
                        d >> j & 1 == 0 || (0..k).all(|i| !below[i][j] || d >> i & 1 == 1)
                    })
                })
                .collect();
            if downsets.len() > max_size {
                continue;
            }
            let leq: Vec<Vec<bool>> = downsets
                .iter()
                .map(|&a| downsets.iter().map(|&b| a & b == a).collect())
                .collect();
            let lattice = validate_lattice(&leq).expect("down-set lattices are lattices");
            let (code, perm) = canonical_labeling(&lattice);
            let key = (lattice.size(), std::cmp::Reverse(code));
            if seen.insert(key) {
                let relabeled: Vec<Vec<bool>> = (0..perm.len())
                    .map(|i| (0..perm.len()).map(|j| lattice.leq(perm[i], perm[j])).collect())
                    .collect();
                let canon = validate_lattice(&relabeled).expect("relabeling preserves lattices");
                found.push((key.0, key.1, canon));
            }
        }
    }
    found.sort_by_key(|a| (a.0, a.1));
    found
        .into_iter()
        .map(|(_, _, lattice)| derive_heyting(lattice))
        .collect()
}

/// Outcome of the refinability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinability {
    pub refinable: bool,
    /// For each subset (bitmask), a refining disjoint antichain (bitmask).
    pub certificates: Vec<(u32, u32)>,
    /// A subset admitting no refining disjoint antichain.
    pub counterexample: Option<u32>,
}

/// Searches, for every subset `A`, a pairwise-disjoint family `B` of nonzero
/// elements each below some member of `A`, with `⋁B = ⋁A`.
///
/// Pairwise-disjoint nonzero elements are in particular an antichain.
pub fn check_refinable(h: &HeytingAlgebra) -> Result<Refinability, AlgebraError> {
    let n = h.size();
    if n > REFINABLE_CAP {
        return Err(AlgebraError::CapExceeded {
            requested: n,
            cap: REFINABLE_CAP,
        });
    }
    let mut certificates = Vec::with_capacity(1 << n);
    for subset in 0u32..(1u32 << n) {
        let members: Vec<Elem> = (0..n).filter(|&i| subset >> i & 1 == 1).collect();
        let target = h.join_all(members.iter().copied());
        let candidates: Vec<Elem> = h
            .elements()
            .filter(|&d| d != h.bottom() && members.iter().any(|&a| h.leq(d, a)))
            .collect();
        match disjoint_cover(h, &candidates, target) {
            Some(b) => certificates.push((subset, b)),
            None => {
                return Ok(Refinability {
                    refinable: false,
                    certificates,
                    counterexample: Some(subset),
                })
            }
        }
    }
    Ok(Refinability {
        refinable: true,
        certificates,
        counterexample: None,
    })
}

fn disjoint_cover(h: &HeytingAlgebra, candidates: &[Elem], target: Elem) -> Option<u32> {
    fn go(
        h: &HeytingAlgebra,
        candidates: &[Elem],
        idx: usize,
        chosen: &mut Vec<Elem>,
        acc: Elem,
        target: Elem,
    ) -> bool {
        if acc == target {
            return true;
        }
        if idx == candidates.len() {
            return false;
        }
        let c = candidates[idx];
        if chosen.iter().all(|&b| h.meet(b, c) == h.bottom()) {
            chosen.push(c);
            if go(h, candidates, idx + 1, chosen, h.join(acc, c), target) {
                return true;
            }
            chosen.pop();
        }
        go(h, candidates, idx + 1, chosen, acc, target)
    }
    let mut chosen = Vec::new();
    go(h, candidates, 0, &mut chosen, h.bottom(), target)
        .then(|| chosen.iter().fold(0u32, |m, &e| m | (1 << e)))
}

/// Line-oriented algebra file:
///
/// ```text
/// algebra <ident>
/// size <N>
/// leq
/// <N rows of N '0'/'1' characters>
/// end
/// ```
pub fn parse_algebra_block(lines: &mut dyn Iterator<Item = (usize, String)>, name: &str)
    -> Result<(String, HeytingAlgebra), crate::files::FileError>
{
    use crate::files::FileError;
    let mut size: Option<usize> = None;
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut in_matrix = false;
    for (lineno, line) in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if in_matrix {
            let n = size.expect("size precedes leq");
            if rows.len() < n {
                let compact: String = t.chars().filter(|c| !c.is_whitespace()).collect();
                if compact.len() != n || !compact.chars().all(|c| c == '0' || c == '1') {
                    return Err(FileError::at(lineno, format!("expected {n} characters of 0/1")));
                }
                rows.push(compact.chars().map(|c| c == '1').collect());
                continue;
            }
            in_matrix = false;
        }
        let mut words = t.split_whitespace();
        match words.next() {
            Some("size") => {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| FileError::at(lineno, "size needs a count"))?;
                size = Some(n);
            }
            Some("leq") => {
                if size.is_none() {
                    return Err(FileError::at(lineno, "leq before size"));
                }
                in_matrix = true;
            }
            Some("end") => {
                let n = size.ok_or_else(|| FileError::at(lineno, "missing size"))?;
                if rows.len() != n {
                    return Err(FileError::at(lineno, format!("expected {n} matrix rows")));
                }
                let algebra = HeytingAlgebra::from_leq(&rows)
                    .map_err(|e| FileError::at(lineno, e.to_string()))?;
                return Ok((name.to_string(), algebra));
            }
            Some(other) => {
                return Err(FileError::at(lineno, format!("unexpected `{other}` in algebra block")))
            }
            None => {}
        }
    }
    Err(FileError::at(0, "algebra block not terminated by `end`"))
}

/// Writes an algebra in the file format accepted by [`parse_algebra_block`].
pub fn write_algebra(name: &str, h: &HeytingAlgebra) -> String {
    let mut out = format!("algebra {name}\nsize {}\nleq\n", h.size());
    for i in h.elements() {
        let row: String = h.elements().map(|j| if h.leq(i, j) { '1' } else { '0' }).collect();
        out.push_str(&row);
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; n]; n];
        for i in 0..n {
            m[i][i] = true;
        }
        for &(a, b) in pairs {
            m[a][b] = true;
        }
        m
    }

    #[test]
    fn two_chain_is_min_max() {
        let l = validate_lattice(&rel(2, &[(0, 1)])).unwrap();
        assert_eq!((l.bottom(), l.top()), (0, 1));
        assert_eq!(l.meet(0, 1), 0);
        assert_eq!(l.join(0, 1), 1);
    }

    #[test]
    fn three_chain_valid() {
        let l = validate_lattice(&rel(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(l.meet(x, y), x.min(y));
                assert_eq!(l.join(x, y), x.max(y));
            }
        }
    }

    #[test]
    fn n_shaped_poset_has_no_join() {
        // a=0, b=1 minimal; c=2 above both, d=3 above b only.
        let err = validate_lattice(&rel(4, &[(0, 2), (1, 2), (1, 3)])).unwrap_err();
        assert!(matches!(err, AlgebraError::NoJoin(_, _)), "{err:?}");
    }

    #[test]
    fn poset_violations_are_named() {
        let mut m = rel(2, &[(0, 1), (1, 0)]);
        assert!(matches!(
            validate_lattice(&m).unwrap_err(),
            AlgebraError::NotAPoset { property: "antisymmetry", .. }
        ));
        m[0][0] = false;
        assert!(matches!(
            validate_lattice(&m).unwrap_err(),
            AlgebraError::NotAPoset { property: "reflexivity", pair: (0, 0) }
        ));
        let t = rel(3, &[(0, 1), (1, 2)]);
        assert_eq!(
            validate_lattice(&t).unwrap_err(),
            AlgebraError::NotAPoset { property: "transitivity", pair: (0, 2) }
        );
        assert_eq!(validate_lattice(&[]).unwrap_err(), AlgebraError::NotBounded);
    }

    #[test]
    fn boolean_two_has_material_implication() {
        let h = HeytingAlgebra::chain(2);
        assert_eq!(h.imp(0, 0), 1);
        assert_eq!(h.imp(0, 1), 1);
        assert_eq!(h.imp(1, 0), 0);
        assert_eq!(h.imp(1, 1), 1);
    }

    #[test]
    fn three_chain_implication_matches_brute_force() {
        let h = HeytingAlgebra::chain(3);
        let (zero, a, one) = (0, 1, 2);
        assert_eq!(h.imp(a, zero), zero);
        assert_eq!(h.imp(one, a), a);
        for x in 0..3 {
            assert_eq!(h.imp(zero, x), one);
            for y in 0..3 {
                let brute = (0..3).filter(|&z| x.min(z) <= y).max().unwrap();
                assert_eq!(h.imp(x, y), brute);
                if x <= y {
                    assert_eq!(h.imp(x, y), one);
                }
            }
        }
    }

    #[test]
    fn diamond_m3_is_not_distributive() {
        let m3 = rel(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)]);
        let lattice = validate_lattice(&m3).unwrap();
        assert!(matches!(
            derive_heyting(lattice).unwrap_err(),
            AlgebraError::NotDistributive(_, _, _)
        ));
    }

    #[test]
    fn boolean_detection() {
        assert!(HeytingAlgebra::chain(1).is_boolean());
        assert!(HeytingAlgebra::chain(2).is_boolean());
        let c3 = HeytingAlgebra::chain(3);
        assert!(!is_boolean(&c3));
        assert_eq!(c3.join(1, c3.imp(1, 0)), 1);
        assert!(HeytingAlgebra::powerset(2).is_boolean());
    }

    #[test]
    fn enumeration_small_sizes() {
        assert_eq!(enumerate_heyting(1).unwrap().len(), 1);
        let two = enumerate_heyting(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].size(), 1);
        assert_eq!(two[1].size(), 2);
        let three = enumerate_heyting(3).unwrap();
        assert!(three.iter().any(|h| is_isomorphic(h.lattice(), HeytingAlgebra::chain(3).lattice())));
        assert!(matches!(
            enumerate_heyting(8).unwrap_err(),
            AlgebraError::CapExceeded { requested: 8, cap: 7 }
        ));
    }

    #[test]
    fn enumerated_labels_put_bottom_first_and_top_last() {
        for h in enumerate_heyting(6).unwrap() {
            assert_eq!(h.bottom(), 0);
            assert_eq!(h.top(), h.size() - 1);
        }
    }

    #[test]
    fn refinability_small_cases() {
        let r = check_refinable(&HeytingAlgebra::chain(2)).unwrap();
        assert!(r.refinable);
        assert_eq!(r.certificates.len(), 4);
        assert!(check_refinable(&HeytingAlgebra::chain(1)).unwrap().refinable);
        // Chains: the largest member of A refines A on its own.
        let c3 = check_refinable(&HeytingAlgebra::chain(3)).unwrap();
        assert!(c3.refinable);
        let cert = c3.certificates.iter().find(|(s, _)| *s == 0b110).unwrap();
        assert_eq!(cert.1, 0b100);
    }

    #[test]
    fn stacked_square_is_not_refinable() {
        // 0 < d < a, b < 1: a and b overlap in d, so {a, b} has no disjoint refinement.
        let m = rel(
            5,
            &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 4), (3, 4)],
        );
        let h = HeytingAlgebra::from_leq(&m).unwrap();
        let r = check_refinable(&h).unwrap();
        assert!(!r.refinable);
        assert_eq!(r.counterexample, Some(0b01100));
    }

    #[test]
    fn algebra_file_round_trip() {
        let h = HeytingAlgebra::chain(3);
        let text = write_algebra("c3", &h);
        let parsed = crate::files::parse_algebra_file(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].1, h);
    }
}
