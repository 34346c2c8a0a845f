//! Sequences over a group: finite multisets of elements, written
//! multiplicatively as `g_1^{v_1} ⋯ g_k^{v_k}`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Automorphism, ElementSet, Group, GroupElement};

/// A multiset of group elements.
///
/// Stored as `(element index, multiplicity)` pairs sorted by index, every
/// multiplicity at least 1. Equal multisets therefore have equal
/// representations, and the derived ordering is a fixed total order.
#[derive(Clone)]
pub struct Sequence {
    group: Arc<Group>,
    terms: Vec<(u32, u32)>,
}

/// One entry of the JSON form of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub element: Vec<u32>,
    pub multiplicity: u32,
}

impl Sequence {
    pub fn empty(group: Arc<Group>) -> Self {
        Sequence { group, terms: Vec::new() }
    }

    /// From a dense multiplicity vector indexed by element index.
    pub fn from_counts<T: Copy + Into<u32>>(group: Arc<Group>, counts: &[T]) -> Self {
        debug_assert_eq!(counts.len(), group.order());
        let terms = counts
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| {
                let c: u32 = c.into();
                (c > 0).then_some((i as u32, c))
            })
            .collect();
        Sequence { group, terms }
    }

    /// From element indices, in any order and with repetition.
    pub fn from_indices(group: Arc<Group>, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = vec![0u32; group.order()];
        for i in idx {
            counts[i] += 1;
        }
        Self::from_counts(group, &counts)
    }

    pub fn from_elements(group: Arc<Group>, items: &[(GroupElement, u32)]) -> Result<Self> {
        let mut counts = vec![0u32; group.order()];
        for (g, m) in items {
            counts[group.index_of(g)?] += m;
        }
        Ok(Self::from_counts(group, &counts))
    }

    /// Parses the literal form `(r1,…,rk)^m (s1,…,sk)^n …`. Whitespace between
    /// terms is optional and a missing exponent means 1.
    pub fn parse(group: Arc<Group>, text: &str) -> Result<Self> {
        let mut counts = vec![0u32; group.order()];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body_start = rest.strip_prefix('(').ok_or_else(|| Error::Parse(format!("expected '(' at {rest:?}")))?;
            let close = body_start.find(')').ok_or_else(|| Error::Parse("unclosed '('".into()))?;
            let residues = body_start[..close]
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad residue {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let g = GroupElement::new(group.spec(), &residues)?;
            rest = &body_start[close + 1..];
            let mut mult = 1u32;
            if let Some(after) = rest.strip_prefix('^') {
                let digits = after.find(|c: char| !c.is_ascii_digit()).unwrap_or(after.len());
                mult = after[..digits].parse().map_err(|_| Error::Parse(format!("bad exponent at {after:?}")))?;
                rest = &after[digits..];
            }
            counts[group.index_of(&g)?] += mult;
            rest = rest.trim_start();
        }
        Ok(Self::from_counts(group, &counts))
    }

    pub fn from_json_terms(group: Arc<Group>, terms: &[JsonTerm]) -> Result<Self> {
        let items = terms
            .iter()
            .map(|t| {
                let r: Vec<i64> = t.element.iter().map(|&x| i64::from(x)).collect();
                Ok((GroupElement::new(group.spec(), &r)?, t.multiplicity))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_elements(group, &items)
    }

    pub fn to_json_terms(&self) -> Vec<JsonTerm> {
        self.terms
            .iter()
            .map(|&(i, m)| JsonTerm { element: self.group.element(i as usize).residues().to_vec(), multiplicity: m })
            .collect()
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    /// `(element index, multiplicity)` pairs in canonical order.
    pub fn terms(&self) -> &[(u32, u32)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.terms.iter().map(|&(i, _)| self.group.element(i as usize)).collect()
    }

    pub fn multiplicity_idx(&self, idx: usize) -> u32 {
        self.terms.binary_search_by_key(&(idx as u32), |&(i, _)| i).map_or(0, |p| self.terms[p].1)
    }

    pub fn multiplicity(&self, g: &GroupElement) -> u32 {
        self.group.index_of(g).map_or(0, |i| self.multiplicity_idx(i))
    }

    /// Largest multiplicity, `h(S)`.
    pub fn max_multiplicity(&self) -> u32 {
        self.terms.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }

    pub fn counts(&self) -> Vec<u8> {
        let mut c = vec![0u8; self.group.order()];
        for &(i, m) in &self.terms {
            c[i as usize] = u8::try_from(m).expect("multiplicity fits in u8");
        }
        c
    }

    /// Element indices with repetition, non-decreasing.
    pub fn indices(&self) -> Vec<usize> {
        self.terms.iter().flat_map(|&(i, m)| std::iter::repeat_n(i as usize, m as usize)).collect()
    }

    pub fn sigma_idx(&self) -> usize {
        self.terms.iter().fold(0, |acc, &(i, m)| self.group.add_idx(acc, self.group.mul_idx(i as usize, u64::from(m))))
    }

    /// The sum `σ(S)`.
    pub fn sigma(&self) -> GroupElement {
        self.group.element(self.sigma_idx())
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sigma_idx() == 0
    }

    /// The nonempty subsums `Σ(S)` as a set of indices.
    ///
    /// Dynamic programming over the support: for each element `g` the reachable
    /// set is extended by `1..=v_g(S)` copies of `g`, so the cost is
    /// `O(|G| · |S|)` regardless of how many subsequences there are.
    pub fn subsums_idx(&self) -> ElementSet {
        let g = &self.group;
        let mut reach = ElementSet::default();
        for &(e, m) in &self.terms {
            let e = e as usize;
            let copies = m.min(g.order_idx(e));
            let base = reach;
            let mut kg = 0;
            for _ in 0..copies {
                kg = g.add_idx(kg, e);
                reach.insert(kg);
                for x in base.iter() {
                    reach.insert(g.add_idx(x, kg));
                }
            }
        }
        reach
    }

    pub fn subsums(&self) -> BTreeSet<GroupElement> {
        self.subsums_idx().iter().map(|i| self.group.element(i)).collect()
    }

    /// `0 ∉ Σ(S)`.
    pub fn is_zero_sum_free(&self) -> bool {
        !self.subsums_idx().contains(0)
    }

    /// `−S`.
    pub fn negate(&self) -> Sequence {
        self.map_indices(|i| self.group.neg_idx(i))
    }

    pub fn apply(&self, phi: &Automorphism) -> Sequence {
        self.map_indices(|i| phi.apply_idx(i))
    }

    fn map_indices(&self, f: impl Fn(usize) -> usize) -> Sequence {
        let mut terms: Vec<(u32, u32)> = self.terms.iter().map(|&(i, m)| (f(i as usize) as u32, m)).collect();
        terms.sort_unstable();
        Sequence { group: self.group.clone(), terms }
    }

    /// `T | S` in the free monoid.
    pub fn divides(&self, other: &Sequence) -> bool {
        self.terms.iter().all(|&(i, m)| other.multiplicity_idx(i as usize) >= m)
    }

    /// `S · T^{-1}`; fails unless `T | S`.
    pub fn quotient(&self, divisor: &Sequence) -> Result<Sequence> {
        self.same_group(divisor)?;
        if !divisor.divides(self) {
            return Err(Error::Domain(format!("{divisor} does not divide {self}")));
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|&(i, m)| {
                let left = m - divisor.multiplicity_idx(i as usize);
                (left > 0).then_some((i, left))
            })
            .collect();
        Ok(Sequence { group: self.group.clone(), terms })
    }

    /// `S · g^{-1}` for a single occurrence of the element with index `idx`.
    pub fn remove_one(&self, idx: usize) -> Result<Sequence> {
        self.quotient(&Sequence::from_indices(self.group.clone(), [idx]))
    }

    /// `S · T`.
    pub fn product(&self, other: &Sequence) -> Result<Sequence> {
        self.same_group(other)?;
        let mut counts = vec![0u32; self.group.order()];
        for &(i, m) in self.terms.iter().chain(&other.terms) {
            counts[i as usize] += m;
        }
        Ok(Self::from_counts(self.group.clone(), &counts))
    }

    fn same_group(&self, other: &Sequence) -> Result<()> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(Error::Structural(format!("sequences over {} and {}", self.group.spec(), other.group.spec())))
        }
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.group == other.group
    }
}

impl Eq for Sequence {}

impl Hash for Sequence {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sequence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms.cmp(&other.terms).then_with(|| self.group.spec().cmp(other.group.spec()))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(i, m)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}^{m}", self.group.element(i as usize))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence[{}]", self)
    }
}

/// `R ∪ (R + g) ∪ {g}`: the subsums after appending one copy of `g`.
#[inline]
pub fn extend_subsums(group: &Group, reach: &ElementSet, g: usize) -> ElementSet {
    let mut out = *reach;
    out.insert(g);
    for x in reach.iter() {
        out.insert(group.add_idx(x, g));
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use proptest::prelude::*;

    fn grp(s: &str) -> Arc<Group> {
        Arc::new(Group::new(GroupSpec::parse(s).unwrap()).unwrap())
    }

    fn seq(g: &Arc<Group>, s: &str) -> Sequence {
        Sequence::parse(g.clone(), s).unwrap()
    }

    fn brute_subsums(s: &Sequence) -> ElementSet {
        let idx = s.indices();
        let g = s.group();
        let mut out = ElementSet::default();
        for mask in 1u32..(1 << idx.len()) {
            let sum =
                idx.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).fold(0, |acc, (_, &e)| g.add_idx(acc, e));
            out.insert(sum);
        }
        out
    }

    #[test]
    fn sigma_examples() {
        let c4 = grp("4");
        assert_eq!(Sequence::empty(c4.clone()).sigma().to_string(), "(0)");
        assert_eq!(seq(&c4, "(1)^4").sigma().to_string(), "(0)");
        let g = grp("2,4");
        assert_eq!(seq(&g, "(1,0)^1 (0,1)^3").sigma().to_string(), "(1,3)");
    }

    #[test]
    fn subsum_examples() {
        let c4 = grp("4");
        let s: Vec<_> = seq(&c4, "(1)^2").subsums().iter().map(|e| e.to_string()).collect();
        assert_eq!(s, ["(1)", "(2)"]);
        let g = grp("2,4");
        let long = seq(&g, "(0,1)^3 (1,0)^1");
        assert!(long.is_zero_sum_free());
        assert_eq!(long.subsums_idx().len(), g.order() - 1);
        assert!(!long.subsums_idx().contains(0));
        let v4 = grp("2,2");
        let s: Vec<_> = seq(&v4, "(1,1)").subsums().iter().map(|e| e.to_string()).collect();
        assert_eq!(s, ["(1,1)"]);
    }

    #[test]
    fn zero_sum_free_examples() {
        let c4 = grp("4");
        assert!(seq(&c4, "(1)^3").is_zero_sum_free());
        assert!(!seq(&c4, "(1)^4").is_zero_sum_free());
        assert!(Sequence::empty(c4.clone()).is_zero_sum_free());
        assert!(!seq(&c4, "(0)").is_zero_sum_free());
    }

    #[test]
    fn negate_examples() {
        let c4 = grp("4");
        assert_eq!(seq(&c4, "(1)^2(3)^1").negate(), seq(&c4, "(3)^2 (1)"));
        let v4 = grp("2,2");
        assert_eq!(seq(&v4, "(1,0)").negate(), seq(&v4, "(1,0)"));
    }

    #[test]
    fn divide_examples() {
        let c4 = grp("4");
        let s = seq(&c4, "(1)^2(2)^1");
        let t = seq(&c4, "(1)");
        assert!(t.divides(&s));
        assert_eq!(s.quotient(&t).unwrap(), seq(&c4, "(1)(2)"));
        assert!(s.quotient(&s).unwrap().is_empty());
        let three = seq(&c4, "(3)");
        assert!(!three.divides(&seq(&c4, "(1)^2")));
        assert!(matches!(seq(&c4, "(1)^2").quotient(&three), Err(Error::Domain(_))));
    }

    #[test]
    fn literal_format() {
        let g = grp("2,4");
        let s = seq(&g, "(1,0)(0,1)^3(1,1)");
        assert_eq!(s.to_string(), "(0,1)^3 (1,0)^1 (1,1)^1");
        assert_eq!(seq(&g, &s.to_string()), s);
        assert_eq!(s.len(), 5);
        assert!(Sequence::parse(g.clone(), "(1,0").is_err());
        assert!(Sequence::parse(g.clone(), "(1)").is_err());
        assert!(Sequence::parse(g.clone(), "(1,x)").is_err());
        assert!(seq(&g, "").is_empty());
        let json = serde_json::to_string(&s.to_json_terms()).unwrap();
        assert_eq!(
            json,
            r#"[{"element":[0,1],"multiplicity":3},{"element":[1,0],"multiplicity":1},{"element":[1,1],"multiplicity":1}]"#
        );
        assert_eq!(Sequence::from_json_terms(g.clone(), &s.to_json_terms()).unwrap(), s);
    }

    /// Every multiset of length ≤ `max_len` over the group.
    pub(crate) fn all_sequences(g: &Arc<Group>, max_len: usize) -> Vec<Sequence> {
        fn rec(g: &Arc<Group>, start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Sequence>) {
            out.push(Sequence::from_indices(g.clone(), cur.iter().copied()));
            if left == 0 {
                return;
            }
            for e in start..g.order() {
                cur.push(e);
                rec(g, e, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(g, 0, max_len, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn zero_sum_freeness_is_negation_invariant() {
        let g = grp("2,4");
        for s in all_sequences(&g, 4) {
            let n = s.negate();
            assert_eq!(s.is_zero_sum_free(), n.is_zero_sum_free(), "{s}");
            let negated: ElementSet = {
                let mut e = ElementSet::default();
                for x in s.subsums_idx().iter() {
                    e.insert(g.neg_idx(x));
                }
                e
            };
            assert_eq!(negated, n.subsums_idx());
            assert_eq!(n.negate(), s);
        }
    }

    fn arb_sequence() -> impl Strategy<Value = Sequence> {
        let groups = ["2,4", "4,4", "3,3", "2,2,2", "6", "2,2,4", "3,3,3"];
        (0..groups.len(), proptest::collection::vec(any::<u16>(), 0..=12)).prop_map(move |(gi, raw)| {
            let g = grp(groups[gi]);
            let n = g.order();
            Sequence::from_indices(g, raw.into_iter().map(|r| r as usize % n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn subsum_dp_matches_brute_force(s in arb_sequence()) {
            prop_assert_eq!(s.subsums_idx(), brute_subsums(&s));
            prop_assert!(s.subsums_idx().len() <= s.group().order());
        }

        #[test]
        fn literal_round_trip(s in arb_sequence()) {
            let text = s.to_string();
            prop_assert_eq!(Sequence::parse(s.group().clone(), &text).unwrap(), s);
        }
    }
}
