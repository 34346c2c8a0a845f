//! Automorphism orbits on atoms, used to shrink searches over atom pairs.
//!
//! Sets of lengths are invariant under automorphisms, so for any pair
//! `(U, V)` it suffices to look at `(φ(U), φ(V))` with `φ(U)` the chosen
//! representative of the orbit of `U`. Pair families built here therefore take
//! the first atom from orbit representatives and the second from all atoms.

use std::collections::HashSet;

use crate::atoms::AtomSet;
use crate::error::Result;
use crate::group::Automorphism;
use crate::sequence::Sequence;

/// A generating subset of `auts`, chosen greedily.
pub fn generators(auts: &[Automorphism]) -> Vec<Automorphism> {
    let mut gens: Vec<Automorphism> = Vec::new();
    let mut closure: HashSet<Vec<u16>> = HashSet::new();
    closure.insert(auts[0].permutation().to_vec());
    for phi in auts {
        if closure.contains(phi.permutation()) {
            continue;
        }
        gens.push(phi.clone());
        // re-close under the enlarged generating set
        let mut frontier: Vec<Vec<u16>> = closure.iter().cloned().collect();
        while let Some(p) = frontier.pop() {
            for g in &gens {
                let q: Vec<u16> = p.iter().map(|&i| g.permutation()[i as usize]).collect();
                if closure.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        if closure.len() == auts.len() {
            break;
        }
    }
    gens
}

/// Orbit decomposition of the nonzero atoms together with the pair families
/// the invariant searches iterate over.
#[derive(Debug, Clone)]
pub struct PairSpace<'a> {
    atoms: &'a AtomSet,
    rep_of: Vec<usize>,
    reps: Vec<usize>,
    automorphism_count: usize,
}

impl<'a> PairSpace<'a> {
    /// Orbits under the full automorphism group (at most `max_auts` of them).
    pub fn new(atoms: &'a AtomSet, max_auts: usize) -> Result<Self> {
        let group = atoms.group();
        let auts = group.automorphisms(max_auts)?;
        let gens = generators(&auts);
        Ok(Self::with_generators(atoms, &gens, auts.len()))
    }

    /// No reduction: every atom is its own representative.
    pub fn trivial(atoms: &'a AtomSet) -> Self {
        PairSpace { atoms, rep_of: (0..atoms.len()).collect(), reps: (1..atoms.len()).collect(), automorphism_count: 1 }
    }

    fn with_generators(atoms: &'a AtomSet, gens: &[Automorphism], automorphism_count: usize) -> Self {
        let n = atoms.len();
        let mut rep_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        rep_of[0] = 0;
        // atoms are sorted, so the first unseen atom is the least of its orbit
        for start in 1..n {
            if rep_of[start] != usize::MAX {
                continue;
            }
            reps.push(start);
            rep_of[start] = start;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for g in gens {
                    let y = atoms.id_of(&atoms.atoms()[x].apply(g)).expect("automorphic image of an atom is an atom");
                    if rep_of[y] == usize::MAX {
                        rep_of[y] = start;
                        stack.push(y);
                    }
                }
            }
        }
        PairSpace { atoms, rep_of, reps, automorphism_count }
    }

    pub fn atoms(&self) -> &'a AtomSet {
        self.atoms
    }

    /// Ids of the orbit representatives among the nonzero atoms.
    pub fn representatives(&self) -> &[usize] {
        &self.reps
    }

    pub fn representative_of(&self, id: usize) -> usize {
        self.rep_of[id]
    }

    pub fn automorphism_count(&self) -> usize {
        self.automorphism_count
    }

    pub fn atom(&self, id: usize) -> &'a Sequence {
        &self.atoms.atoms()[id]
    }

    /// Ordered pairs `(rep, v)` of atom ids, `rep` an orbit representative and
    /// `v` any nonzero atom, filtered by `keep(|U|, |V|)`. Sorted by id.
    pub fn pairs(&self, keep: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &u in &self.reps {
            let lu = self.atom(u).len();
            for v in 1..self.atoms.len() {
                if keep(lu, self.atom(v).len()) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Pairs covering every unordered pair of nonzero atoms up to automorphism.
    pub fn unordered_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|lu, lv| lu >= lv)
    }

    /// Pairs with prescribed lengths `|U| = a`, `|V| = b`.
    pub fn pairs_of_lengths(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        self.pairs(|lu, lv| lu == a && lv == b)
    }

    pub fn product(&self, (u, v): (usize, usize)) -> Sequence {
        self.atom(u).product(self.atom(v)).expect("same group")
    }
}
