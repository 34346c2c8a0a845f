//! Minimal zero-sum sequences `A(G)` and the Davenport constant.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{ElementSet, Group};
use crate::limits::{Budget, Limits};
use crate::sequence::{extend_subsums, Sequence};

/// Whether `seq` is a minimal zero-sum sequence.
///
/// A proper nonempty zero-sum subsequence misses at least one occurrence of
/// some `g ∈ supp(A)` and therefore divides `A·g^{-1}`, so it is enough to
/// check that every such quotient is zero-sum free.
pub fn is_atom(seq: &Sequence) -> bool {
    if seq.is_empty() || !seq.is_zero_sum() {
        return false;
    }
    seq.terms().iter().all(|&(g, _)| seq.remove_one(g as usize).expect("support element divides").is_zero_sum_free())
}

/// The complete set of atoms over a group.
///
/// Atoms are sorted by length and then canonically, so the prime `0` (the
/// only atom of length 1) sits at index 0.
#[derive(Debug, Clone)]
pub struct AtomSet {
    group: Arc<Group>,
    atoms: Vec<Sequence>,
    index: HashMap<Vec<(u32, u32)>, usize>,
    davenport: usize,
}

impl AtomSet {
    fn from_atoms(group: Arc<Group>, atoms: BTreeSet<Sequence>) -> Self {
        let mut atoms: Vec<Sequence> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index = atoms.iter().enumerate().map(|(i, a)| (a.terms().to_vec(), i)).collect();
        let davenport = atoms.iter().map(Sequence::len).max().unwrap_or(0);
        AtomSet { group, atoms, index, davenport }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn davenport(&self) -> usize {
        self.davenport
    }

    /// All atoms including the prime `0`.
    pub fn atoms(&self) -> &[Sequence] {
        &self.atoms
    }

    /// Atoms other than `0`.
    pub fn nonzero(&self) -> &[Sequence] {
        &self.atoms[1..]
    }

    pub fn is_prime_zero(&self, id: usize) -> bool {
        id == 0
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn id_of(&self, seq: &Sequence) -> Option<usize> {
        self.index.get(seq.terms()).copied()
    }

    pub fn contains(&self, seq: &Sequence) -> bool {
        self.id_of(seq).is_some()
    }

    pub fn of_length(&self, len: usize) -> impl Iterator<Item = (usize, &Sequence)> + '_ {
        self.atoms.iter().enumerate().filter(move |(_, a)| a.len() == len)
    }

    /// True when `D(G) = 1 + Σ (n_i − 1)`.
    pub fn davenport_formula_check(&self) -> bool {
        self.davenport == self.group.spec().davenport_formula()
    }
}

/// Enumerates `A(G)`.
///
/// Depth-first search over zero-sum-free sequences `S` whose elements are
/// chosen in non-decreasing index order, with the subsum set carried along
/// the path so that a branch is cut as soon as `0 ∈ Σ(S)`. Each such `S`
/// closes to the candidate `S · (−σ(S))`; requiring the closing element to be
/// at least the last chosen one makes every atom arise from exactly one `S`
/// (the atom minus one copy of its largest element). Subtrees are split by
/// their first element and searched in parallel.
pub fn enumerate_atoms(group: &Arc<Group>, limits: &Limits) -> Result<AtomSet> {
    let budget = limits.budget();
    let max_len = 2 * group.spec().davenport_formula();
    let n = group.order();
    let found: Vec<Vec<Sequence>> = (1..n)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut path = vec![first];
            let mut reach = ElementSet::default();
            reach.insert(first);
            dfs(group, &budget, max_len, &mut path, reach, first, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut atoms = BTreeSet::new();
    atoms.insert(Sequence::from_indices(group.clone(), [0]));
    for s in found.into_iter().flatten() {
        if !atoms.insert(s) {
            return Err(Error::Structural("atom emitted twice".into()));
        }
    }
    Ok(AtomSet::from_atoms(group.clone(), atoms))
}

fn dfs(
    group: &Arc<Group>,
    budget: &Budget,
    max_len: usize,
    path: &mut Vec<usize>,
    reach: ElementSet,
    sum: usize,
    out: &mut Vec<Sequence>,
) -> Result<()> {
    budget.tick()?;
    let last = *path.last().expect("nonempty path");
    let closing = group.neg_idx(sum);
    if closing >= last && path.len() < max_len {
        let cand = Sequence::from_indices(group.clone(), path.iter().copied().chain([closing]));
        if is_atom(&cand) {
            out.push(cand);
        }
    }
    if path.len() + 1 >= max_len {
        return Ok(());
    }
    for e in last..group.order() {
        let next = extend_subsums(group, &reach, e);
        if next.contains(0) {
            continue;
        }
        path.push(e);
        dfs(group, budget, max_len, path, next, group.add_idx(sum, e), out)?;
        path.pop();
    }
    Ok(())
}
