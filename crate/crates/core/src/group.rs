//! Finite abelian groups in invariant-factor form.
//!
//! A [`GroupSpec`] is the isomorphism class `C_{n_1} ⊕ … ⊕ C_{n_r}` with
//! `n_1 | … | n_r`. A [`Group`] is a spec together with precomputed addition,
//! negation and order tables over the dense element index. The index of an
//! element is its rank in lexicographic order of residue vectors, which is the
//! canonical order used everywhere else in the crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling imposed by [`ElementSet`].
pub const MAX_ORDER: usize = ElementSet::CAPACITY;

/// Invariant factors `n_1 | n_2 | … | n_r`, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct GroupSpec {
    factors: Vec<u32>,
}

impl GroupSpec {
    /// Builds the invariant-factor form of `C_{m_1} ⊕ … ⊕ C_{m_k}` for arbitrary
    /// cyclic orders `m_i`. Factors equal to 1 are dropped.
    pub fn from_cyclic_orders(orders: &[u32]) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::Structural("cyclic factor of order 0".into()));
        }
        // prime -> exponents of that prime across the summands
        let mut by_prime: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &m in orders {
            for (p, e) in factorize(m) {
                by_prime.entry(p).or_default().push(e);
            }
        }
        let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
        if rank == 0 {
            return Err(Error::Structural("trivial group".into()));
        }
        let mut factors = vec![1u32; rank];
        for (p, mut exps) in by_prime {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            // largest powers go to the last invariant factor
            for (slot, e) in exps.into_iter().enumerate() {
                let f = &mut factors[rank - 1 - slot];
                *f = f.checked_mul(p.checked_pow(e).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
        }
        Ok(GroupSpec { factors })
    }

    /// Accepts `"2,4"`, `"C2xC4"`, `"C2^2 x C4"` and similar spellings.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty group spec".into()));
        }
        let mut orders = Vec::new();
        if t.starts_with(['C', 'c']) {
            for term in t.split(['x', 'X', '+', '⊕', '*']) {
                let term = term.trim();
                let body =
                    term.strip_prefix(['C', 'c']).ok_or_else(|| Error::Parse(format!("bad cyclic term {term:?}")))?;
                let (base, power) = match body.split_once('^') {
                    Some((b, p)) => (b, parse_u32(p)?),
                    None => (body, 1),
                };
                let n = parse_u32(base)?;
                orders.extend(std::iter::repeat_n(n, power as usize));
            }
        } else {
            for term in t.split(',') {
                orders.push(parse_u32(term)?);
            }
        }
        Self::from_cyclic_orders(&orders)
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn exponent(&self) -> u32 {
        *self.factors.last().expect("rank >= 1")
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|&n| u64::from(n)).product()
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() == 1
    }

    pub fn is_elementary_2(&self) -> bool {
        self.factors.iter().all(|&n| n == 2)
    }

    pub fn is_p_group(&self) -> bool {
        factorize(self.exponent()).len() == 1
    }

    /// `1 + Σ (n_i − 1)`, the value of the Davenport constant for p-groups and
    /// groups of rank at most two.
    pub fn davenport_formula(&self) -> usize {
        1 + self.factors.iter().map(|&n| n as usize - 1).sum::<usize>()
    }

    /// `C_2^{r-1} ⊕ C_4` for some `r ≥ 2`.
    pub fn is_c2_power_c4(&self) -> bool {
        let (last, rest) = self.factors.split_last().expect("rank >= 1");
        *last == 4 && !rest.is_empty() && rest.iter().all(|&n| n == 2)
    }

    /// `C_2 ⊕ C_{2n}` for some `n ≥ 2`.
    pub fn is_c2_c2n(&self) -> bool {
        matches!(self.factors.as_slice(), [2, m] if m % 2 == 0 && *m >= 4)
    }

    /// All elements in lexicographic order, refusing groups larger than `cap`.
    pub fn elements(&self, cap: usize) -> Result<Vec<GroupElement>> {
        let order = self.order();
        if order > cap as u64 {
            return Err(Error::Resource(format!("group of order {order} exceeds enumeration cap {cap}")));
        }
        let mut out = Vec::with_capacity(order as usize);
        let mut cur = vec![0u32; self.rank()];
        loop {
            out.push(GroupElement { residues: cur.clone() });
            // odometer increment, last coordinate fastest
            let mut i = self.rank();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.factors[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

fn overflow() -> Error {
    Error::Structural("group order overflows u32".into())
}

fn parse_u32(s: &str) -> Result<u32> {
    s.trim().parse::<u32>().map_err(|_| Error::Parse(format!("expected a positive integer, got {s:?}")))
}

fn factorize(mut n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl TryFrom<Vec<u32>> for GroupSpec {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::from_cyclic_orders(&v)
    }
}

impl From<GroupSpec> for Vec<u32> {
    fn from(g: GroupSpec) -> Self {
        g.factors
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "C{n}")?;
        }
        Ok(())
    }
}

/// A residue vector; component `i` lies in `[0, n_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    residues: Vec<u32>,
}

impl GroupElement {
    /// Reduces each residue modulo the matching invariant factor.
    pub fn new(spec: &GroupSpec, residues: &[i64]) -> Result<Self> {
        if residues.len() != spec.rank() {
            return Err(Error::Structural(format!(
                "element has {} coordinates, group {spec} has rank {}",
                residues.len(),
                spec.rank()
            )));
        }
        let residues = residues.iter().zip(spec.factors()).map(|(&r, &n)| r.rem_euclid(i64::from(n)) as u32).collect();
        Ok(GroupElement { residues })
    }

    pub fn residues(&self) -> &[u32] {
        &self.residues
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.residues.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// Fixed-capacity bitset over element indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ElementSet {
    words: [u64; 4],
}

impl ElementSet {
    pub const CAPACITY: usize = 256;

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut words = self.words;
        for (w, o) in words.iter_mut().zip(other.words) {
            *w |= o;
        }
        ElementSet { words }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// A group together with its arithmetic tables.
#[derive(Debug, Clone)]
pub struct Group {
    spec: GroupSpec,
    order: usize,
    strides: Vec<usize>,
    add: Vec<u16>,
    neg: Vec<u16>,
    ord: Vec<u32>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Group {}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        Self::with_cap(spec, MAX_ORDER)
    }

    pub fn with_cap(spec: GroupSpec, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_ORDER);
        let order = spec.order();
        if order > cap as u64 {
            return Err(Error::Resource(format!("group {spec} of order {order} exceeds cap {cap}")));
        }
        let order = order as usize;
        let r = spec.rank();
        let mut strides = vec![1usize; r];
        for i in (0..r.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * spec.factors[i + 1] as usize;
        }
        let mut g = Group {
            spec,
            order,
            strides,
            add: Vec::with_capacity(order * order),
            neg: Vec::with_capacity(order),
            ord: Vec::with_capacity(order),
        };
        let residues: Vec<Vec<u32>> = (0..order).map(|i| g.residues_of(i)).collect();
        for a in &residues {
            for b in &residues {
                let s = g.index_from(a.iter().zip(b).zip(&g.spec.factors).map(|((x, y), n)| (x + y) % n));
                g.add.push(s as u16);
            }
        }
        for a in &residues {
            let n = g.index_from(a.iter().zip(&g.spec.factors).map(|(x, n)| (n - x) % n));
            g.neg.push(n as u16);
            g.ord.push(order_of_residues(a, &g.spec.factors));
        }
        Ok(g)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn index_from(&self, residues: impl Iterator<Item = u32>) -> usize {
        residues.zip(&self.strides).map(|(r, s)| r as usize * s).sum()
    }

    fn residues_of(&self, mut idx: usize) -> Vec<u32> {
        self.strides
            .iter()
            .map(|&s| {
                let r = idx / s;
                idx %= s;
                r as u32
            })
            .collect()
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement { residues: self.residues_of(idx) }
    }

    pub fn index_of(&self, g: &GroupElement) -> Result<usize> {
        self.check(g)?;
        Ok(self.index_from(g.residues.iter().copied()))
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = g.residues.len() == self.spec.rank() && g.residues.iter().zip(&self.spec.factors).all(|(r, n)| r < n);
        if ok {
            Ok(())
        } else {
            Err(Error::Structural(format!("{g} is not an element of {}", self.spec)))
        }
    }

    #[inline]
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b] as usize
    }

    #[inline]
    pub fn neg_idx(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    #[inline]
    pub fn order_idx(&self, a: usize) -> u32 {
        self.ord[a]
    }

    /// `k · a` for a non-negative multiple `k`.
    pub fn mul_idx(&self, a: usize, k: u64) -> usize {
        let k = (k % u64::from(self.ord[a])) as usize;
        (0..k).fold(0, |acc, _| self.add_idx(acc, a))
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        Ok(self.element(self.add_idx(self.index_of(g)?, self.index_of(h)?)))
    }

    pub fn neg(&self, g: &GroupElement) -> Result<GroupElement> {
        Ok(self.element(self.neg_idx(self.index_of(g)?)))
    }

    /// Least `k ≥ 1` with `k·g = 0`.
    pub fn order_of(&self, g: &GroupElement) -> Result<u32> {
        self.check(g)?;
        Ok(order_of_residues(&g.residues, &self.spec.factors))
    }

    pub fn zero(&self) -> GroupElement {
        self.element(0)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order).map(|i| self.element(i)).collect()
    }

    /// The standard basis `e_i`, with `ord(e_i) = n_i`.
    pub fn basis(&self) -> Vec<usize> {
        self.strides.clone()
    }

    pub fn subgroup_generated(&self, gens: &[GroupElement]) -> Result<BTreeSet<GroupElement>> {
        let idx = gens.iter().map(|g| self.index_of(g)).collect::<Result<Vec<_>>>()?;
        let set = self.subgroup_idx(&idx);
        Ok(set.iter().map(|i| self.element(i)).collect())
    }

    pub fn subgroup_idx(&self, gens: &[usize]) -> ElementSet {
        let mut set = ElementSet::default();
        set.insert(0);
        for &g in gens {
            set = self.extend_subgroup(&set, g);
        }
        set
    }

    fn extend_subgroup(&self, set: &ElementSet, g: usize) -> ElementSet {
        if set.contains(g) {
            return *set;
        }
        let mut out = *set;
        let mut mult = g;
        while mult != 0 {
            for h in set.iter() {
                out.insert(self.add_idx(h, mult));
            }
            mult = self.add_idx(mult, g);
        }
        out
    }

    /// Every automorphism of the group, the identity first.
    ///
    /// Images of the basis are chosen one at a time; a partial choice survives
    /// only if `ord(φ(e_i))` divides `n_i` and the chosen images generate a
    /// subgroup of order `n_1 ⋯ n_k`, i.e. `φ` is injective so far.
    pub fn automorphisms(&self, max_count: usize) -> Result<Vec<Automorphism>> {
        let basis = self.basis();
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(basis.len());
        let start = self.subgroup_idx(&[]);
        self.aut_search(&mut chosen, &start, 1, max_count, &mut out)?;
        Ok(out)
    }

    fn aut_search(
        &self,
        chosen: &mut Vec<usize>,
        sub: &ElementSet,
        sub_order: usize,
        max_count: usize,
        out: &mut Vec<Automorphism>,
    ) -> Result<()> {
        let k = chosen.len();
        if k == self.spec.rank() {
            if out.len() >= max_count {
                return Err(Error::Resource(format!("more than {max_count} automorphisms of {}", self.spec)));
            }
            out.push(self.automorphism_from_images(chosen));
            return Ok(());
        }
        let n = self.spec.factors[k] as usize;
        let target = sub_order * n;
        // visit the identity image first so the identity map comes out first
        let basis_k = self.strides[k];
        let candidates = std::iter::once(basis_k).chain((0..self.order).filter(|&c| c != basis_k));
        for c in candidates {
            if !n.is_multiple_of(self.ord[c] as usize) {
                continue;
            }
            let next = self.extend_subgroup(sub, c);
            if next.len() != target {
                continue;
            }
            chosen.push(c);
            self.aut_search(chosen, &next, target, max_count, out)?;
            chosen.pop();
        }
        Ok(())
    }

    fn automorphism_from_images(&self, images: &[usize]) -> Automorphism {
        let perm = (0..self.order)
            .map(|i| {
                let r = self.residues_of(i);
                r.iter().zip(images).fold(0, |acc, (&ri, &img)| self.add_idx(acc, self.mul_idx(img, u64::from(ri))))
                    as u16
            })
            .collect();
        Automorphism { images: images.iter().map(|&i| self.element(i)).collect(), perm }
    }
}

fn order_of_residues(residues: &[u32], factors: &[u32]) -> u32 {
    residues.iter().zip(factors).fold(1u64, |acc, (&r, &n)| {
        let o = u64::from(n) / gcd(u64::from(n), u64::from(r));
        acc / gcd(acc, o) * o
    }) as u32
}

/// A group automorphism, stored as the images of the standard basis together
/// with the induced permutation of element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    images: Vec<GroupElement>,
    perm: Vec<u16>,
}

impl Automorphism {
    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    #[inline]
    pub fn apply_idx(&self, i: usize) -> usize {
        self.perm[i] as usize
    }

    pub fn permutation(&self) -> &[u16] {
        &self.perm
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism, group: &Group) -> Automorphism {
        let perm: Vec<u16> = other.perm.iter().map(|&i| self.perm[i as usize]).collect();
        let images = group.basis().iter().map(|&b| group.element(perm[b] as usize)).collect();
        Automorphism { images, perm }
    }
}
