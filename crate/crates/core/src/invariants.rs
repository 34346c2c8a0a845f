//! Group-level invariants computed from the atoms: `ℸ(G)`, the catenary
//! degree `c(G)` (exact where it can be certified, otherwise an interval),
//! the refined elasticities `ρ_k(G)` and an observed part of `Δ(G)`.
//!
//! Everything except `ρ_k` for `k > 2` is a search over products `UV` of two
//! atoms. Those searches run over the orbit-reduced pair family of
//! [`PairSpace`] and are processed in a fixed order, so results and witnesses
//! do not depend on thread scheduling.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{bits_to_set, delta_of_set, factorizations, LengthEngine};
use crate::group::GroupSpec;
use crate::limits::{Budget, Limits};
use crate::orbits::PairSpace;
use crate::sequence::Sequence;

/// Length sets of `UV` for each pair, as bitmasks, in input order.
pub(crate) fn pair_lengths(space: &PairSpace<'_>, pairs: &[(usize, usize)], budget: &Budget) -> Result<Vec<u128>> {
    let group = space.atoms().group();
    pairs
        .par_iter()
        .map_init(
            || LengthEngine::new(group),
            |engine, &(u, v)| {
                budget.tick()?;
                let mut counts = space.atom(u).counts();
                for &(i, m) in space.atom(v).terms() {
                    counts[i as usize] += m as u8;
                }
                Ok(engine.lengths(&counts))
            },
        )
        .collect()
}

fn min_above_two(bits: u128) -> Option<usize> {
    let rest = bits & !(1 << 2);
    (rest != 0).then(|| rest.trailing_zeros() as usize)
}

fn max_length(bits: u128) -> usize {
    127 - bits.leading_zeros() as usize
}

/// Pairs grouped by `⌊(|U| + |V|) / 2⌋`, largest first. That quantity bounds
/// `max L(UV)` because every atom of a zero-free block has length ≥ 2.
fn by_level(space: &PairSpace<'_>) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut levels: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    let mut all = space.unordered_pairs();
    let level = |&(u, v): &(usize, usize)| (space.atom(u).len() + space.atom(v).len()) / 2;
    all.sort_by_key(|p| std::cmp::Reverse(level(p)));
    for p in all {
        let l = level(&p);
        match levels.last_mut() {
            Some((lv, ps)) if *lv == l => ps.push(p),
            _ => levels.push((l, vec![p])),
        }
    }
    for (_, ps) in &mut levels {
        ps.sort_unstable();
    }
    levels
}

/// A pair of atoms together with `L(UV)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub u: String,
    pub v: String,
    pub lengths: BTreeSet<usize>,
}

impl PairWitness {
    pub(crate) fn new(u: &Sequence, v: &Sequence, bits: u128) -> Self {
        PairWitness { u: u.to_string(), v: v.to_string(), lengths: bits_to_set(bits) }
    }
}

/// Result of the `ℸ(G)` search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Daleth {
    pub value: usize,
    pub witness: Option<PairWitness>,
    pub pairs_examined: usize,
}

/// `ℸ(G) = max { min (L(UV) \ {2}) : U, V ∈ A(G), L(UV) ≠ {2} }`.
///
/// `2 ∈ L(a)` exactly when `a` is a product of two atoms, so the maximum runs
/// over atom pairs. Pairs are visited level by level (see [`by_level`]) and
/// the search stops once no remaining pair can beat the current maximum. The
/// witness is the least pair, by id, on the first level attaining the maximum.
pub fn daleth(space: &PairSpace<'_>, limits: &Limits) -> Result<Daleth> {
    let budget = limits.budget();
    let mut best = 0usize;
    let mut witness = None;
    let mut examined = 0;
    for (level, pairs) in by_level(space) {
        if level <= best.max(2) {
            break;
        }
        let lens = pair_lengths(space, &pairs, &budget)?;
        examined += pairs.len();
        for (&(u, v), &bits) in pairs.iter().zip(&lens) {
            if let Some(m) = min_above_two(bits) {
                if m > best {
                    best = m;
                    witness = Some(PairWitness::new(space.atom(u), space.atom(v), bits));
                }
            }
        }
    }
    Ok(Daleth { value: best, witness, pairs_examined: examined })
}

/// `max { n_r, 1 + Σ ⌊n_i / 2⌋ }`, a lower bound for `ℸ(G)` when `|G| ≥ 3`.
pub fn daleth_lower_bound(spec: &GroupSpec) -> usize {
    let n_r = spec.exponent() as usize;
    let halves = 1 + spec.factors().iter().map(|&n| n as usize / 2).sum::<usize>();
    n_r.max(halves)
}

/// How the value of `c(G)` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatenaryReason {
    /// `ℸ(G) ≥ ⌊D(G)/2 + 1⌋`, which squeezes `c(G)` down to `ℸ(G)`.
    BoundsMeet,
    /// Cyclic or elementary 2-group, where `c(G) = D(G)`.
    KnownClass,
    /// Only bounds are available.
    IntervalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Catenary {
    Exact(usize),
    Interval { lo: usize, hi: usize },
}

impl Catenary {
    pub fn lo(&self) -> usize {
        match *self {
            Catenary::Exact(c) => c,
            Catenary::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> usize {
        match *self {
            Catenary::Exact(c) => c,
            Catenary::Interval { hi, .. } => hi,
        }
    }

    pub fn exact(&self) -> Option<usize> {
        match *self {
            Catenary::Exact(c) => Some(c),
            Catenary::Interval { .. } => None,
        }
    }

    /// `Some(true)` if certainly `c = x`, `Some(false)` if certainly not.
    pub fn equals(&self, x: usize) -> Option<bool> {
        match *self {
            Catenary::Exact(c) => Some(c == x),
            Catenary::Interval { lo, hi } if x < lo || x > hi => Some(false),
            Catenary::Interval { .. } => None,
        }
    }
}

impl fmt::Display for Catenary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Catenary::Exact(c) => write!(f, "{c}"),
            Catenary::Interval { lo, hi } => write!(f, "[{lo},{hi}]"),
        }
    }
}

impl fmt::Display for CatenaryReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatenaryReason::BoundsMeet => "bounds_meet",
            CatenaryReason::KnownClass => "known_class",
            CatenaryReason::IntervalOnly => "interval_only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatenaryDegree {
    pub value: Catenary,
    pub reason: CatenaryReason,
}

/// Number of two-atom blocks whose catenary degree is computed to raise the
/// lower end of an interval answer.
pub const CATENARY_SAMPLE: usize = 64;

/// `c(G)`, exact only when it is forced.
///
/// Upper bound `max {⌊D/2 + 1⌋, ℸ}` and lower bound `ℸ`; when they meet the
/// value is exact. Otherwise cyclic groups and elementary 2-groups have
/// `c = D`, and every other group gets the interval, its lower end raised by
/// the catenary degrees of a deterministic sample of two-atom blocks.
pub fn catenary_group(space: &PairSpace<'_>, daleth: &Daleth, limits: &Limits) -> Result<CatenaryDegree> {
    let atoms = space.atoms();
    let spec = atoms.group().spec();
    if spec.order() < 3 {
        return Err(Error::Domain(format!("catenary degree of {spec} needs |G| >= 3")));
    }
    let d = atoms.davenport();
    let half = d / 2 + 1;
    if daleth.value >= half {
        return Ok(CatenaryDegree { value: Catenary::Exact(daleth.value), reason: CatenaryReason::BoundsMeet });
    }
    if spec.is_cyclic() || spec.is_elementary_2() {
        return Ok(CatenaryDegree { value: Catenary::Exact(d), reason: CatenaryReason::KnownClass });
    }
    let hi = half.max(daleth.value);
    let mut lo = daleth.value;
    let mut pairs = space.unordered_pairs();
    let size = |&(u, v): &(usize, usize)| space.atom(u).len() + space.atom(v).len();
    pairs.sort_by(|a, b| size(b).cmp(&size(a)).then(a.cmp(b)));
    for p in pairs.into_iter().take(CATENARY_SAMPLE) {
        let f = factorizations(&space.product(p), atoms, limits)?;
        lo = lo.max(f.catenary());
    }
    let value = if lo == hi { Catenary::Exact(lo) } else { Catenary::Interval { lo, hi } };
    Ok(CatenaryDegree { value, reason: CatenaryReason::IntervalOnly })
}

/// Cap on the number of `k`-multisets of atoms examined by [`rho`] for `k > 2`.
pub const RHO_TUPLE_CAP: u128 = 5_000_000;

/// `ρ_k(G) = max { max L : k ∈ L ∈ L(G) }`.
///
/// `k ∈ L(B)` exactly when `B` is a product of `k` atoms, so this is the
/// largest `max L(U_1 ⋯ U_k)`. `k = 2` runs over the orbit-reduced pairs;
/// larger `k` enumerates multisets of atoms outright and is refused when
/// there are more than [`RHO_TUPLE_CAP`] of them.
pub fn rho(space: &PairSpace<'_>, k: usize, limits: &Limits) -> Result<usize> {
    let budget = limits.budget();
    match k {
        0 => Ok(0),
        1 => Ok(1),
        2 => {
            let mut best = 2;
            for (level, pairs) in by_level(space) {
                if level <= best {
                    break;
                }
                let lens = pair_lengths(space, &pairs, &budget)?;
                best = lens.iter().map(|&b| max_length(b)).fold(best, usize::max);
            }
            Ok(best)
        }
        _ => rho_tuples(space, k, &budget),
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn rho_tuples(space: &PairSpace<'_>, k: usize, budget: &Budget) -> Result<usize> {
    let atoms = space.atoms();
    let n = atoms.len();
    let tuples = binomial((n + k - 1) as u128, k as u128);
    if tuples > RHO_TUPLE_CAP {
        return Err(Error::Resource(format!("rho_{k} needs {tuples} atom multisets (cap {RHO_TUPLE_CAP})")));
    }
    let group = atoms.group();
    let order = group.order();
    (0..n)
        .into_par_iter()
        .map_init(
            || LengthEngine::new(group),
            |engine, first| {
                let mut best = 0;
                let mut counts = vec![0u8; order];
                let mut stack = vec![first];
                add(&mut counts, &atoms.atoms()[first], 1);
                tuple_rec(atoms.atoms(), k, &mut stack, &mut counts, engine, &mut best, budget)?;
                Ok(best)
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

fn add(counts: &mut [u8], atom: &Sequence, sign: i8) {
    for &(i, m) in atom.terms() {
        let c = &mut counts[i as usize];
        *c = if sign > 0 { *c + m as u8 } else { *c - m as u8 };
    }
}

fn tuple_rec(
    atoms: &[Sequence],
    k: usize,
    stack: &mut Vec<usize>,
    counts: &mut [u8],
    engine: &mut LengthEngine<'_>,
    best: &mut usize,
    budget: &Budget,
) -> Result<()> {
    if stack.len() == k {
        budget.tick()?;
        *best = (*best).max(max_length(engine.lengths(counts)));
        return Ok(());
    }
    let last = *stack.last().expect("nonempty");
    for next in last..atoms.len() {
        stack.push(next);
        add(counts, &atoms[next], 1);
        tuple_rec(atoms, k, stack, counts, engine, best, budget)?;
        add(counts, &atoms[next], -1);
        stack.pop();
    }
    Ok(())
}

/// Distances observed in `L(UV)` over all two-atom blocks with
/// `|UV| ≤ length_cap`, together with any extra blocks supplied.
///
/// This is a subset of `Δ(G)`, not a certified computation of it.
pub fn delta_observed(
    space: &PairSpace<'_>,
    length_cap: usize,
    extra_blocks: &[Sequence],
    limits: &Limits,
) -> Result<BTreeSet<usize>> {
    let budget = limits.budget();
    let pairs = space.pairs(|lu, lv| lu >= lv && lu + lv <= length_cap);
    let mut out = BTreeSet::new();
    for bits in pair_lengths(space, &pairs, &budget)? {
        out.extend(delta_of_set(&bits_to_set(bits)));
    }
    let mut engine = LengthEngine::new(space.atoms().group());
    for b in extra_blocks {
        if !b.is_zero_sum() {
            return Err(Error::Domain(format!("{b} is not a zero-sum sequence")));
        }
        out.extend(delta_of_set(&bits_to_set(engine.lengths(&b.counts()))));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{enumerate_atoms, AtomSet};
    use crate::group::Group;
    use std::sync::Arc;

    fn atoms(s: &str) -> AtomSet {
        let g = Arc::new(Group::new(GroupSpec::parse(s).unwrap()).unwrap());
        enumerate_atoms(&g, &Limits::default()).unwrap()
    }

    /// `ℸ` over every ordered pair of nonzero atoms, no orbits, no pruning.
    fn brute_daleth(a: &AtomSet) -> usize {
        let g = a.group();
        let mut engine = LengthEngine::new(g);
        let mut best = 0;
        for u in a.nonzero() {
            for v in a.nonzero() {
                let b = u.product(v).unwrap();
                if let Some(m) = min_above_two(engine.lengths(&b.counts())) {
                    best = best.max(m);
                }
            }
        }
        best
    }

    #[test]
    fn lower_bound_formula() {
        let p = |s: &str| GroupSpec::parse(s).unwrap();
        assert_eq!(daleth_lower_bound(&p("2,4")), 4);
        assert_eq!(daleth_lower_bound(&p("3,3")), 3);
        assert_eq!(daleth_lower_bound(&p("4,4")), 5);
    }

    #[test]
    fn daleth_small_groups() {
        for (s, want) in [("3", 3), ("2,2", 3), ("4", 4), ("2,4", 4), ("2,2,2", 4), ("5", 5), ("3,3", 3), ("6", 6)] {
            let a = atoms(s);
            let space = PairSpace::new(&a, 1_000_000).unwrap();
            let d = daleth(&space, &Limits::default()).unwrap();
            assert_eq!(d.value, want, "{s}");
            assert_eq!(brute_daleth(&a), want, "{s} brute force");
            let w = d.witness.unwrap();
            assert_eq!(w.lengths.iter().find(|&&l| l != 2), Some(&want));
            assert!(d.value >= daleth_lower_bound(a.group().spec()));
        }
    }

    #[test]
    fn daleth_without_orbit_reduction_agrees() {
        for s in ["2,4", "3,3", "2,2,4"] {
            let a = atoms(s);
            let reduced = daleth(&PairSpace::new(&a, 1_000_000).unwrap(), &Limits::default()).unwrap();
            let plain = daleth(&PairSpace::trivial(&a), &Limits::default()).unwrap();
            assert_eq!(reduced.value, plain.value, "{s}");
            assert!(reduced.pairs_examined < plain.pairs_examined);
        }
    }

    #[test]
    fn catenary_examples() {
        let lim = Limits::default();
        for (s, want, reason) in [
            ("5", 5, CatenaryReason::BoundsMeet),
            ("2,4", 4, CatenaryReason::BoundsMeet),
            ("3,3", 3, CatenaryReason::BoundsMeet),
        ] {
            let a = atoms(s);
            let space = PairSpace::new(&a, 1_000_000).unwrap();
            let d = daleth(&space, &lim).unwrap();
            let c = catenary_group(&space, &d, &lim).unwrap();
            assert_eq!(c.value, Catenary::Exact(want), "{s}");
            assert_eq!(c.reason, reason);
        }
        let a = atoms("2");
        assert!(catenary_group(&PairSpace::trivial(&a), &Daleth { value: 0, witness: None, pairs_examined: 0 }, &lim)
            .is_err());
    }

    #[test]
    fn interval_branches() {
        let lim = Limits::default();
        let a = atoms("2,4");
        let space = PairSpace::new(&a, 1_000).unwrap();
        // a deliberately weak daleth forces the interval and lookup paths
        let weak = Daleth { value: 2, witness: None, pairs_examined: 0 };
        let c = catenary_group(&space, &weak, &lim).unwrap();
        assert_eq!(c.reason, CatenaryReason::IntervalOnly);
        // sampled blocks never exceed c(C2+C4) = 4
        assert!((3..=4).contains(&c.value.lo()));
        assert_eq!(c.value.hi(), 5 / 2 + 1);
        let a = atoms("2,2,2");
        let space = PairSpace::new(&a, 1_000).unwrap();
        let c = catenary_group(&space, &weak, &lim).unwrap();
        assert_eq!((c.value, c.reason), (Catenary::Exact(4), CatenaryReason::KnownClass));
    }

    #[test]
    fn rho_identities() {
        let lim = Limits::default();
        for (s, d) in [("5", 5), ("2,4", 5), ("2,2,2", 4), ("3", 3)] {
            let a = atoms(s);
            let space = PairSpace::new(&a, 1_000_000).unwrap();
            assert_eq!(rho(&space, 2, &lim).unwrap(), d, "{s}");
        }
        // k D(G) = rho_{2k}(G) with k = 2
        for (s, d) in [("3", 3), ("2,2", 3), ("4", 4)] {
            let a = atoms(s);
            let space = PairSpace::new(&a, 1_000).unwrap();
            assert_eq!(rho(&space, 4, &lim).unwrap(), 2 * d, "{s}");
            assert!(rho(&space, 3, &lim).unwrap() > d);
        }
        let a = atoms("3,3,3");
        let space = PairSpace::new(&a, 1_000_000).unwrap();
        assert!(rho(&space, 3, &lim).unwrap_err().is_resource());
    }

    #[test]
    fn delta_examples() {
        let lim = Limits::default();
        let a = atoms("2,4");
        let space = PairSpace::new(&a, 1_000).unwrap();
        let delta = delta_observed(&space, 2 * a.davenport(), &[], &lim).unwrap();
        assert!(delta.contains(&1) && delta.contains(&2));
        assert_eq!(delta.iter().max(), Some(&2));
        let a = atoms("3");
        let space = PairSpace::new(&a, 1_000).unwrap();
        assert_eq!(delta_observed(&space, 6, &[], &lim).unwrap(), BTreeSet::from([1]));
        let a = atoms("2,2");
        let space = PairSpace::new(&a, 1_000).unwrap();
        assert_eq!(delta_observed(&space, 3, &[], &lim).unwrap(), BTreeSet::new());
    }
}
