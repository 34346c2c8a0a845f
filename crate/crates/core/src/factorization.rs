//! Factorizations of zero-sum sequences into atoms, sets of lengths, the
//! factorization distance and the catenary degree of a single block.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::group::{ElementSet, Group};
use crate::limits::{Budget, Limits};
use crate::sequence::{extend_subsums, Sequence};

/// A multiset of atoms, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factorization {
    parts: Vec<Sequence>,
}

impl Factorization {
    pub fn new(mut parts: Vec<Sequence>) -> Self {
        parts.sort();
        Factorization { parts }
    }

    pub fn parts(&self) -> &[Sequence] {
        &self.parts
    }

    /// `|z|`, the number of atoms counted with multiplicity.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The block this factorization multiplies out to.
    pub fn product(&self, group: &Arc<Group>) -> Sequence {
        self.parts
            .iter()
            .try_fold(Sequence::empty(group.clone()), |acc, p| acc.product(p))
            .expect("parts share one group")
    }
}

/// `Z(B)` together with `L(B)`.
#[derive(Debug, Clone)]
pub struct FactorizationSet {
    block: Sequence,
    factorizations: Vec<Factorization>,
    ids: Vec<Vec<u32>>,
    lengths: BTreeSet<usize>,
}

impl FactorizationSet {
    pub fn block(&self) -> &Sequence {
        &self.block
    }

    pub fn factorizations(&self) -> &[Factorization] {
        &self.factorizations
    }

    pub fn lengths(&self) -> &BTreeSet<usize> {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.factorizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factorizations.is_empty()
    }

    /// `c(B)`; see [`catenary_of_element`].
    pub fn catenary(&self) -> usize {
        bottleneck_threshold(&self.ids)
    }
}

fn check_block(block: &Sequence, atoms: &AtomSet, limits: &Limits) -> Result<()> {
    if block.group() != atoms.group() {
        return Err(Error::Structural("block and atoms over different groups".into()));
    }
    if !block.is_zero_sum() {
        return Err(Error::Domain(format!("{block} is not a zero-sum sequence")));
    }
    let cap = limits.block_cap(atoms.davenport());
    if block.len() > cap {
        return Err(Error::Resource(format!("block of length {} exceeds cap {cap}", block.len())));
    }
    Ok(())
}

/// Every factorization of `block`, each exactly once.
///
/// Atoms are taken in the fixed order of the atom set and each recursive step
/// only picks atoms at or after the previous choice, so every multiset of
/// atoms is produced once. The prime `0` is split off first.
pub fn factorizations(block: &Sequence, atoms: &AtomSet, limits: &Limits) -> Result<FactorizationSet> {
    check_block(block, atoms, limits)?;
    let budget = limits.budget();
    let zeros = block.multiplicity_idx(0) as usize;
    let mut rest = block.counts();
    rest[0] = 0;
    let candidates: Vec<(u32, &Sequence)> = atoms
        .nonzero()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.terms().iter().all(|&(i, m)| u32::from(rest[i as usize]) >= m))
        .map(|(k, a)| (k as u32 + 1, a))
        .collect();
    let mut found: Vec<Vec<u32>> = Vec::new();
    let mut chosen = Vec::new();
    let mut remaining = rest.iter().map(|&c| c as usize).sum::<usize>();
    enumerate_ordered(
        &candidates,
        0,
        &mut rest,
        &mut remaining,
        &mut chosen,
        &mut found,
        limits.max_factorizations,
        &budget,
    )?;
    let mut ids = Vec::with_capacity(found.len());
    let mut factorizations = Vec::with_capacity(found.len());
    let mut lengths = BTreeSet::new();
    for mut z in found {
        z.extend(std::iter::repeat_n(0, zeros));
        z.sort_unstable();
        lengths.insert(z.len());
        factorizations.push(Factorization::new(z.iter().map(|&i| atoms.atoms()[i as usize].clone()).collect()));
        ids.push(z);
    }
    Ok(FactorizationSet { block: block.clone(), factorizations, ids, lengths })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_ordered(
    candidates: &[(u32, &Sequence)],
    start: usize,
    rest: &mut [u8],
    remaining: &mut usize,
    chosen: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
    max_count: usize,
    budget: &Budget,
) -> Result<()> {
    budget.tick()?;
    if *remaining == 0 {
        if out.len() >= max_count {
            return Err(Error::Resource(format!("more than {max_count} factorizations")));
        }
        out.push(chosen.clone());
        return Ok(());
    }
    for (k, &(id, atom)) in candidates.iter().enumerate().skip(start) {
        if !atom.terms().iter().all(|&(i, m)| u32::from(rest[i as usize]) >= m) {
            continue;
        }
        for &(i, m) in atom.terms() {
            rest[i as usize] -= m as u8;
        }
        *remaining -= atom.len();
        chosen.push(id);
        enumerate_ordered(candidates, k, rest, remaining, chosen, out, max_count, budget)?;
        chosen.pop();
        *remaining += atom.len();
        for &(i, m) in atom.terms() {
            rest[i as usize] += m as u8;
        }
    }
    Ok(())
}

/// `L(B)`, computed without materializing `Z(B)`.
pub fn lengths(block: &Sequence, atoms: &AtomSet, limits: &Limits) -> Result<BTreeSet<usize>> {
    check_block(block, atoms, limits)?;
    let mut engine = LengthEngine::new(atoms.group());
    Ok(bits_to_set(engine.lengths(&block.counts())))
}

pub(crate) fn bits_to_set(bits: u128) -> BTreeSet<usize> {
    (0..128).filter(|k| bits >> k & 1 == 1).collect()
}

/// Memoized length-set computation on dense multiplicity vectors.
///
/// For a block `B` with smallest element `g`, every factorization contains
/// exactly one atom through a given copy of `g`, so
/// `L(B) = ⋃ { 1 + L(B·A^{-1}) : A | B atom, g ∈ A }`.
/// Atom divisors are found once per top-level block and bucketed by their
/// smallest element. Length sets are bitmasks; blocks are limited to 127
/// elements.
pub struct LengthEngine<'g> {
    group: &'g Group,
    memo: FxHashMap<Vec<u8>, u128>,
    by_min: Vec<Vec<Vec<(u16, u8)>>>,
}

impl<'g> LengthEngine<'g> {
    pub fn new(group: &'g Group) -> Self {
        LengthEngine { group, memo: FxHashMap::default(), by_min: vec![Vec::new(); group.order()] }
    }

    /// Length set of the block with multiplicities `counts`, as a bitmask.
    pub fn lengths(&mut self, counts: &[u8]) -> u128 {
        let zeros = counts[0];
        let mut block = counts.to_vec();
        block[0] = 0;
        self.memo.clear();
        for bucket in &mut self.by_min {
            bucket.clear();
        }
        for atom in atom_divisors(self.group, &block) {
            self.by_min[atom[0].0 as usize].push(atom);
        }
        self.rec(&mut block) << zeros
    }

    fn rec(&mut self, block: &mut [u8]) -> u128 {
        let Some(first) = block.iter().position(|&c| c > 0) else {
            return 1;
        };
        if let Some(&hit) = self.memo.get(&*block) {
            return hit;
        }
        let mut acc = 0u128;
        for k in 0..self.by_min[first].len() {
            let divides = self.by_min[first][k].iter().all(|&(i, m)| block[i as usize] >= m);
            if !divides {
                continue;
            }
            for &(i, m) in &self.by_min[first][k] {
                block[i as usize] -= m;
            }
            acc |= self.rec(block) << 1;
            for &(i, m) in &self.by_min[first][k] {
                block[i as usize] += m;
            }
        }
        self.memo.insert(block.to_vec(), acc);
        acc
    }
}

/// All atoms dividing a zero-free block, each once, as sparse
/// `(index, multiplicity)` lists sorted by index.
///
/// Same closing-element scheme as the atom enumeration, restricted to the
/// multiplicities available in the block.
pub fn atom_divisors(group: &Group, block: &[u8]) -> Vec<Vec<(u16, u8)>> {
    let support: Vec<usize> = (1..block.len()).filter(|&i| block[i] > 0).collect();
    let mut used = vec![0u8; block.len()];
    let mut path = Vec::new();
    let mut out = Vec::new();
    for (k, &first) in support.iter().enumerate() {
        used[first] += 1;
        path.push(first);
        let mut reach = ElementSet::default();
        reach.insert(first);
        divisor_dfs(group, block, &support, k, &mut used, &mut path, reach, first, &mut out);
        path.pop();
        used[first] -= 1;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn divisor_dfs(
    group: &Group,
    block: &[u8],
    support: &[usize],
    last_pos: usize,
    used: &mut [u8],
    path: &mut Vec<usize>,
    reach: ElementSet,
    sum: usize,
    out: &mut Vec<Vec<(u16, u8)>>,
) {
    let last = support[last_pos];
    let closing = group.neg_idx(sum);
    if closing >= last && used[closing] < block[closing] {
        let mut atom: Vec<(u16, u8)> = Vec::with_capacity(path.len() + 1);
        for &e in path.iter().chain([&closing]) {
            match atom.last_mut() {
                Some((i, m)) if *i as usize == e => *m += 1,
                _ => atom.push((e as u16, 1)),
            }
        }
        // closing >= last keeps the list sorted
        out.push(atom);
    }
    for pos in last_pos..support.len() {
        let e = support[pos];
        if used[e] >= block[e] {
            continue;
        }
        let next = extend_subsums(group, &reach, e);
        if next.contains(0) {
            continue;
        }
        used[e] += 1;
        path.push(e);
        divisor_dfs(group, block, support, pos, used, path, next, group.add_idx(sum, e), out);
        path.pop();
        used[e] -= 1;
    }
}

/// `Δ(L)`: the successive gaps of a finite set of integers.
pub fn delta_of_set(lengths: &BTreeSet<usize>) -> BTreeSet<usize> {
    lengths.iter().zip(lengths.iter().skip(1)).map(|(a, b)| b - a).collect()
}

/// `d(z, z')`: the larger of the two leftovers after cancelling the greatest
/// common divisor.
pub fn distance(z: &Factorization, w: &Factorization) -> usize {
    let common = sorted_common(&z.parts, &w.parts);
    (z.len() - common).max(w.len() - common)
}

/// Size of the multiset intersection of two sorted slices.
fn sorted_common<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub(crate) fn distance_ids(a: &[u32], b: &[u32]) -> usize {
    let common = sorted_common(a, b);
    (a.len() - common).max(b.len() - common)
}

/// `c(B)`: the least `N` such that any two factorizations of `B` are joined
/// by a chain whose steps have distance at most `N`.
pub fn catenary_of_element(block: &Sequence, atoms: &AtomSet, limits: &Limits) -> Result<usize> {
    Ok(factorizations(block, atoms, limits)?.catenary())
}

/// Minimax connectivity threshold of the complete graph on `zs` weighted by
/// distance: pairwise distances sorted ascending, then merged with a
/// union-find until a single component remains. 0 for fewer than two
/// vertices.
pub(crate) fn bottleneck_threshold(zs: &[Vec<u32>]) -> usize {
    let n = zs.len();
    if n < 2 {
        return 0;
    }
    let mut edges: Vec<(usize, u32, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| ((i + 1)..n).map(move |j| (distance_ids(&zs[i], &zs[j]), i as u32, j as u32)))
        .collect();
    edges.par_sort_unstable();
    let mut dsu = UnionFind::new(n);
    let mut components = n;
    for (w, a, b) in edges {
        if dsu.union(a as usize, b as usize) {
            components -= 1;
            if components == 1 {
                return w;
            }
        }
    }
    unreachable!("complete graph is connected")
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
