//! Interned names of bounded rank and hereditarily finite sets.
//!
//! A name is a finite function from names of lower rank to algebra
//! elements. Ranks follow the stage of first appearance: `V_0` is empty,
//! so the empty name has rank 1 and `rank(u) = 1 + max rank(dom u)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{Elem, HeytingAlgebra};

/// Highest rank a universe may be enumerated to.
pub const MAX_RANK: usize = 3;
/// Largest number of names a single enumeration may produce.
pub const NAME_CAP: u128 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameId(pub u32);

impl NameId {
    /// The empty name; every store interns it first.
    pub const EMPTY: NameId = NameId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("unknown child name {0}")]
    UnknownChild(NameId),
    #[error("child {child} listed with two values {a} and {b}")]
    DuplicateChild { child: NameId, a: Elem, b: Elem },
    #[error("element {0} is outside the algebra")]
    BadElement(Elem),
    #[error("rank {rank} under policy {policy} needs {count} names, above the cap of {cap}")]
    CapExceeded {
        rank: usize,
        policy: String,
        count: u128,
        cap: u128,
    },
    #[error("rank {0} exceeds the maximum of {MAX_RANK}")]
    RankTooHigh(usize),
    #[error("full enumeration stops at rank 2; rank 3 needs a sampled or domains-restricted policy")]
    PolicyRequired,
    #[error("malformed set term at {0}")]
    BadSetTerm(usize),
}

#[derive(Debug, Clone)]
struct NameData {
    entries: Vec<(NameId, Elem)>,
    rank: usize,
}

/// Hash-consed names. Identical entry lists always get the same id.
#[derive(Debug, Clone)]
pub struct NameStore {
    names: Vec<NameData>,
    index: HashMap<Vec<(NameId, Elem)>, NameId>,
}

impl Default for NameStore {
    fn default() -> Self {
        Self::new()
    }
}

impl NameStore {
    pub fn new() -> Self {
        let mut store = NameStore {
            names: Vec::new(),
            index: HashMap::new(),
        };
        store.intern(Vec::new());
        store
    }

    fn intern(&mut self, entries: Vec<(NameId, Elem)>) -> NameId {
        if let Some(&id) = self.index.get(&entries) {
            return id;
        }
        let rank = 1 + entries.iter().map(|(c, _)| self.rank(*c)).max().unwrap_or(0);
        let id = NameId(self.names.len() as u32);
        self.index.insert(entries.clone(), id);
        self.names.push(NameData { entries, rank });
        id
    }

    /// Interns the name with the given graph, in any order.
    pub fn mk_name(&mut self, entries: &[(NameId, Elem)]) -> Result<NameId, UniverseError> {
        let mut sorted = entries.to_vec();
        sorted.sort();
        sorted.dedup();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(UniverseError::DuplicateChild {
                    child: w[0].0,
                    a: w[0].1,
                    b: w[1].1,
                });
            }
        }
        if let Some(&(c, _)) = sorted.iter().find(|(c, _)| c.index() >= self.names.len()) {
            return Err(UniverseError::UnknownChild(c));
        }
        Ok(self.intern(sorted))
    }

    /// Looks a name up without interning it.
    pub fn find(&self, entries: &[(NameId, Elem)]) -> Option<NameId> {
        let mut sorted = entries.to_vec();
        sorted.sort();
        self.index.get(&sorted).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, id: NameId) -> bool {
        id.index() < self.names.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = NameId> {
        (0..self.names.len() as u32).map(NameId)
    }

    pub fn entries(&self, id: NameId) -> &[(NameId, Elem)] {
        &self.names[id.index()].entries
    }

    pub fn domain(&self, id: NameId) -> impl Iterator<Item = NameId> + '_ {
        self.entries(id).iter().map(|(c, _)| *c)
    }

    /// `u(x)`, or `None` when `x` is not in `dom(u)`.
    pub fn value(&self, u: NameId, x: NameId) -> Option<Elem> {
        let e = self.entries(u);
        e.binary_search_by_key(&x, |(c, _)| *c).ok().map(|i| e[i].1)
    }

    pub fn rank(&self, id: NameId) -> usize {
        self.names[id.index()].rank
    }

    /// One dump line: `name <id> rank <r> = { <child>:<element>, ... }`.
    pub fn dump_line(&self, id: NameId) -> String {
        let body: Vec<String> = self.entries(id).iter().map(|(c, e)| format!("{}:{e}", c.0)).collect();
        if body.is_empty() {
            format!("name {} rank {} = {{ }}", id.0, self.rank(id))
        } else {
            format!("name {} rank {} = {{ {} }}", id.0, self.rank(id), body.join(", "))
        }
    }

    pub fn dump(&self, ids: &[NameId]) -> String {
        ids.iter().map(|&id| self.dump_line(id) + "\n").collect()
    }

    /// Copies a name from another store, mapping every value through `emb`.
    pub fn transport(&mut self, from: &NameStore, id: NameId, emb: &[Elem]) -> NameId {
        let entries: Vec<(NameId, Elem)> = from
            .entries(id)
            .iter()
            .map(|&(c, e)| (self.transport(from, c, emb), emb[e]))
            .collect();
        let mut entries = entries;
        entries.sort();
        self.intern(entries)
    }
}

/// How much of a rank level to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Full,
    /// Every name below the top rank plus `k` names of the top rank drawn
    /// without replacement.
    Sampled { seed: u64, k: usize },
    /// Only names whose domain has at most `max_dom` children.
    DomainsRestricted { max_dom: usize },
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Full => write!(f, "full"),
            Policy::Sampled { seed, k } => write!(f, "sampled(seed={seed},k={k})"),
            Policy::DomainsRestricted { max_dom } => write!(f, "domains-restricted({max_dom})"),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of functions from subsets of an `n`-set into an `m`-element
/// algebra with at most `max_dom` entries.
fn count_functions(n: usize, m: usize, max_dom: usize) -> u128 {
    (0..=max_dom.min(n)).fold(0u128, |acc, d| {
        acc.saturating_add(binomial(n as u128, d as u128).saturating_mul((m as u128).saturating_pow(d as u32)))
    })
}

/// Decodes the `index`-th function (mixed radix, `m + 1` digits per child,
/// digit 0 meaning "absent") into an entry list.
fn decode(index: u128, level: &[NameId], m: usize) -> Vec<(NameId, Elem)> {
    let mut entries = Vec::new();
    let mut rest = index;
    for &c in level {
        let digit = (rest % (m as u128 + 1)) as usize;
        rest /= m as u128 + 1;
        if digit > 0 {
            entries.push((c, digit - 1));
        }
    }
    entries
}

/// Calls `f` on every subset-function with at most `max_dom` entries, in
/// lexicographic order of (children, values).
fn each_function(level: &[NameId], m: usize, max_dom: usize, f: &mut impl FnMut(Vec<(NameId, Elem)>)) {
    fn go(
        level: &[NameId],
        m: usize,
        max_dom: usize,
        from: usize,
        cur: &mut Vec<(NameId, Elem)>,
        f: &mut impl FnMut(Vec<(NameId, Elem)>),
    ) {
        f(cur.clone());
        if cur.len() == max_dom {
            return;
        }
        for i in from..level.len() {
            for e in 0..m {
                cur.push((level[i], e));
                go(level, m, max_dom, i + 1, cur, f);
                cur.pop();
            }
        }
    }
    go(level, m, max_dom, 0, &mut Vec::new(), f);
}

/// All names of rank at most `rank_bound`, lowest rank first.
///
/// Within a rank, names appear in lexicographic order of their graphs.
pub fn enumerate_universe(
    store: &mut NameStore,
    algebra: &HeytingAlgebra,
    rank_bound: usize,
    policy: Policy,
) -> Result<Vec<NameId>, UniverseError> {
    if rank_bound > MAX_RANK {
        return Err(UniverseError::RankTooHigh(rank_bound));
    }
    if rank_bound == MAX_RANK && policy == Policy::Full {
        return Err(UniverseError::PolicyRequired);
    }
    let m = algebra.size();
    let mut out: Vec<NameId> = Vec::new();
    let mut below: Vec<NameId> = Vec::new();
    for rank in 1..=rank_bound {
        let top_level = rank == rank_bound;
        let max_dom = match policy {
            Policy::DomainsRestricted { max_dom } => max_dom,
            _ => below.len(),
        };
        let count = count_functions(below.len(), m, max_dom);
        let mut level = Vec::new();
        match policy {
            Policy::Sampled { seed, k } if top_level && (k as u128) < count => {
                let space = usize::try_from(count).ok().filter(|&c| (c as u128) <= NAME_CAP * 1000);
                let space = space.ok_or(UniverseError::CapExceeded {
                    rank,
                    policy: policy.to_string(),
                    count,
                    cap: NAME_CAP,
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picks: Vec<usize> = Vec::new();
                // Resample until k names of exactly this rank are drawn.
                let mut seen = BTreeSet::new();
                let mut attempts = 0;
                while picks.len() < k && attempts < 64 {
                    attempts += 1;
                    for i in sample(&mut rng, space, k.min(space)).into_iter() {
                        if picks.len() < k && seen.insert(i) {
                            let entries = decode(i as u128, &below, m);
                            if entries.iter().any(|(c, _)| store.rank(*c) == rank - 1) {
                                picks.push(i);
                            }
                        }
                    }
                }
                picks.sort_unstable();
                for i in picks {
                    level.push(store.intern(decode(i as u128, &below, m)));
                }
                level.sort();
            }
            _ => {
                if count > NAME_CAP {
                    return Err(UniverseError::CapExceeded {
                        rank,
                        policy: policy.to_string(),
                        count,
                        cap: NAME_CAP,
                    });
                }
                each_function(&below, m, max_dom, &mut |mut entries| {
                    entries.sort();
                    let id = store.intern(entries);
                    if store.rank(id) == rank {
                        level.push(id);
                    }
                });
            }
        }
        out.extend(&level);
        below.extend(level);
    }
    Ok(out)
}

/// `|V_r|` for an `m`-element algebra, or `None` if it overflows.
pub fn universe_size(m: usize, rank: usize) -> Option<u128> {
    let mut v: u128 = 0;
    for _ in 0..rank {
        v = (m as u128 + 1).checked_pow(u32::try_from(v).ok()?)?;
    }
    Some(v)
}

/// A hereditarily finite set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HFSet(pub BTreeSet<HFSet>);

impl HFSet {
    pub fn empty() -> Self {
        HFSet::default()
    }

    pub fn of(members: impl IntoIterator<Item = HFSet>) -> Self {
        HFSet(members.into_iter().collect())
    }

    pub fn contains(&self, x: &HFSet) -> bool {
        self.0.contains(x)
    }

    pub fn members(&self) -> impl Iterator<Item = &HFSet> {
        self.0.iter()
    }

    /// Rank on the same scale as names: the empty set has rank 1.
    pub fn rank(&self) -> usize {
        1 + self.0.iter().map(HFSet::rank).max().unwrap_or(0)
    }

    /// Every HF set of rank at most `r`, ordered.
    pub fn all_up_to_rank(r: usize) -> Vec<HFSet> {
        let mut level: Vec<HFSet> = Vec::new();
        for _ in 0..r {
            let n = level.len();
            let mut next = Vec::with_capacity(1 << n);
            for mask in 0u64..(1u64 << n) {
                next.push(HFSet::of((0..n).filter(|i| mask >> i & 1 == 1).map(|i| level[i].clone())));
            }
            next.sort();
            level = next;
        }
        level
    }

    pub fn parse(text: &str) -> Result<HFSet, UniverseError> {
        let bytes: Vec<(usize, u8)> = text.bytes().enumerate().filter(|(_, b)| !b.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let set = parse_set(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(UniverseError::BadSetTerm(bytes[pos].0));
        }
        Ok(set)
    }
}

fn parse_set(bytes: &[(usize, u8)], pos: &mut usize) -> Result<HFSet, UniverseError> {
    let at = |p: usize| bytes.get(p).map_or(usize::MAX, |(i, _)| *i);
    if bytes.get(*pos).map(|b| b.1) != Some(b'{') {
        return Err(UniverseError::BadSetTerm(at(*pos)));
    }
    *pos += 1;
    let mut members = BTreeSet::new();
    if bytes.get(*pos).map(|b| b.1) == Some(b'}') {
        *pos += 1;
        return Ok(HFSet(members));
    }
    loop {
        members.insert(parse_set(bytes, pos)?);
        match bytes.get(*pos).map(|b| b.1) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(HFSet(members));
            }
            _ => return Err(UniverseError::BadSetTerm(at(*pos))),
        }
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// The check name `{(ŵ, top) : w ∈ s}`.
pub fn hat_embed(s: &HFSet, store: &mut NameStore, algebra: &HeytingAlgebra) -> NameId {
    let mut entries: Vec<(NameId, Elem)> = s.members().map(|w| (hat_embed(w, store, algebra), algebra.top())).collect();
    entries.sort();
    store.intern(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_order_independent() {
        let mut s = NameStore::new();
        let e = NameId::EMPTY;
        let a = s.mk_name(&[(e, 1)]).unwrap();
        let b = s.mk_name(&[(e, 0)]).unwrap();
        let u1 = s.mk_name(&[(a, 1), (b, 0), (e, 1)]).unwrap();
        let u2 = s.mk_name(&[(e, 1), (b, 0), (a, 1)]).unwrap();
        assert_eq!(u1, u2);
        assert_eq!(s.rank(e), 1);
        assert_eq!(s.rank(a), 2);
        assert_eq!(s.rank(u1), 3);
        assert_eq!(s.value(u1, b), Some(0));
        assert_eq!(s.value(a, a), None);
        assert!(matches!(s.mk_name(&[(e, 0), (e, 1)]), Err(UniverseError::DuplicateChild { .. })));
        assert_eq!(s.mk_name(&[(NameId(99), 0)]), Err(UniverseError::UnknownChild(NameId(99))));
    }

    #[test]
    fn small_universes() {
        let two = HeytingAlgebra::chain(2);
        let mut s = NameStore::new();
        assert!(enumerate_universe(&mut s, &two, 0, Policy::Full).unwrap().is_empty());
        assert_eq!(enumerate_universe(&mut s, &two, 1, Policy::Full).unwrap(), vec![NameId::EMPTY]);
        let v2 = enumerate_universe(&mut s, &two, 2, Policy::Full).unwrap();
        assert_eq!(v2.len(), 3);
        assert_eq!(s.dump(&v2), "name 0 rank 1 = { }\nname 1 rank 2 = { 0:0 }\nname 2 rank 2 = { 0:1 }\n");
        assert_eq!(enumerate_universe(&mut s, &two, 3, Policy::Full), Err(UniverseError::PolicyRequired));
        let v3 = enumerate_universe(&mut s, &two, 3, Policy::DomainsRestricted { max_dom: 3 }).unwrap();
        assert_eq!(v3.len() as u128, universe_size(2, 3).unwrap());
        assert_eq!(universe_size(2, 3), Some(27));
        assert_eq!(universe_size(3, 3), Some(256));
    }

    #[test]
    fn restricted_and_sampled_policies() {
        let c3 = HeytingAlgebra::chain(3);
        let mut s = NameStore::new();
        let r = enumerate_universe(&mut s, &c3, 3, Policy::DomainsRestricted { max_dom: 1 }).unwrap();
        // 1 + 3 names below rank 3, then the singletons over the 3 rank-2 names.
        assert_eq!(r.len(), 4 + 9);
        let mut s1 = NameStore::new();
        let a = enumerate_universe(&mut s1, &c3, 3, Policy::Sampled { seed: 7, k: 10 }).unwrap();
        let mut s2 = NameStore::new();
        let b = enumerate_universe(&mut s2, &c3, 3, Policy::Sampled { seed: 7, k: 10 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(s1.dump(&a), s2.dump(&b));
        assert_eq!(a.len(), 4 + 10);
        assert!(a[4..].iter().all(|&id| s1.rank(id) == 3));
    }

    #[test]
    fn hf_sets() {
        let s = HFSet::parse("{ {}, {{}} }").unwrap();
        assert_eq!(s.to_string(), "{{},{{}}}");
        assert_eq!(s.rank(), 3);
        assert_eq!(HFSet::parse("{{},{}}").unwrap(), HFSet::parse("{{}}").unwrap());
        assert!(HFSet::parse("{{}").is_err());
        assert_eq!(HFSet::all_up_to_rank(3).len(), 4);
        assert_eq!(HFSet::all_up_to_rank(4).len(), 16);
    }

    #[test]
    fn hat_unfolds() {
        let c3 = HeytingAlgebra::chain(3);
        let mut s = NameStore::new();
        assert_eq!(hat_embed(&HFSet::empty(), &mut s, &c3), NameId::EMPTY);
        let one = hat_embed(&HFSet::parse("{{}}").unwrap(), &mut s, &c3);
        assert_eq!(s.entries(one), &[(NameId::EMPTY, 2)]);
        let two = hat_embed(&HFSet::parse("{{},{{}}}").unwrap(), &mut s, &c3);
        assert_eq!(s.entries(two), &[(NameId::EMPTY, 2), (one, 2)]);
        let all: BTreeSet<NameId> = HFSet::all_up_to_rank(4).iter().map(|h| hat_embed(h, &mut s, &c3)).collect();
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn transport_maps_values() {
        let mut a = NameStore::new();
        let x = a.mk_name(&[(NameId::EMPTY, 1)]).unwrap();
        let y = a.mk_name(&[(x, 0), (NameId::EMPTY, 1)]).unwrap();
        let mut b = NameStore::new();
        let ty = b.transport(&a, y, &[0, 3]);
        let tx = b.find(&[(NameId::EMPTY, 3)]).unwrap();
        assert_eq!(b.entries(ty), &[(NameId::EMPTY, 3), (tx, 0)]);
    }
}
