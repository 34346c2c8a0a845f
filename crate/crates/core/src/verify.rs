//! Exhaustive checks of the known characterizations of `c(G)`, `ℸ(G)` and
//! of two-atom length sets on a concrete group.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{bits_to_set, LengthEngine};
use crate::group::{Group, GroupSpec};
use crate::invariants::{pair_lengths, CatenaryDegree, Daleth, PairWitness};
use crate::limits::Limits;
use crate::orbits::PairSpace;
use crate::sequence::Sequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Indeterminate,
    NotApplicable,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub target: Target,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairWitness>,
    /// Explicit construction for the group class, with its computed lengths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<PairWitness>,
    /// Pairs examined by an exhaustive search (orbit-reduced).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_examined: Option<usize>,
    /// Number of pairs matching the searched pattern.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<usize>,
}

impl Verdict {
    fn new(target: Target, status: Status, detail: impl Into<String>) -> Self {
        Verdict {
            target,
            status,
            detail: detail.into(),
            witness: None,
            construction: None,
            pairs_examined: None,
            matches: None,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fails
    }
}

/// Statements that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Which groups have `c(G)` equal to `D(G)`, 3 or 4.
    CatenaryClasses,
    /// Which groups have `ℸ(G) = c(G) = D(G) − 1`.
    NearMaximal,
    /// `|U| = |V| = D`, `L(UV) = {2, D−1, D}`.
    FullPairTop,
    /// `|U| = |V| = D`, `L(UV) = {2, D−1}`.
    FullPairGap,
    /// `|U| = D`, `|V| = D−1`, `L(UV) = {2, D−1}`.
    MixedPairGap,
    /// `|U| = |V| = D−1`, `L(UV) = {2, D−1}`.
    ShortPairGap,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::CatenaryClasses,
        Target::NearMaximal,
        Target::FullPairTop,
        Target::FullPairGap,
        Target::MixedPairGap,
        Target::ShortPairGap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Target::CatenaryClasses => "catenary-classes",
            Target::NearMaximal => "near-maximal",
            Target::FullPairTop => "full-pair-top",
            Target::FullPairGap => "full-pair-gap",
            Target::MixedPairGap => "mixed-pair-gap",
            Target::ShortPairGap => "short-pair-gap",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::Parse(format!("unknown target {s:?}")))
    }
}

fn tri(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown",
    }
}

/// Compares a group-class predicate with a possibly unknown computed fact.
fn iff(predicate: bool, computed: Option<bool>) -> Status {
    match computed {
        Some(c) if c == predicate => Status::Holds,
        Some(_) => Status::Fails,
        None => Status::Indeterminate,
    }
}

fn worst(statuses: &[Status]) -> Status {
    if statuses.contains(&Status::Fails) {
        Status::Fails
    } else if statuses.contains(&Status::Indeterminate) {
        Status::Indeterminate
    } else {
        Status::Holds
    }
}

fn is(spec: &GroupSpec, factors: &[&[u32]]) -> bool {
    factors.iter().any(|f| spec.factors() == *f)
}

/// `c(G) ∈ [3, D(G)]`, with `c = D` exactly for cyclic and elementary 2-groups,
/// `c = 3` exactly for `C3, C2², C3²` and `c = 4` exactly for
/// `C4, C2⊕C4, C2³, C3³`.
pub fn verify_catenary_classes(spec: &GroupSpec, davenport: usize, catenary: &CatenaryDegree) -> Verdict {
    if spec.order() < 3 {
        return Verdict::new(Target::CatenaryClasses, Status::NotApplicable, "requires |G| >= 3");
    }
    let c = catenary.value;
    let range = if c.lo() >= 3 && c.hi() <= davenport { Status::Holds } else { Status::Fails };
    let top = iff(spec.is_cyclic() || spec.is_elementary_2(), c.equals(davenport));
    let three = iff(is(spec, &[&[3], &[2, 2], &[3, 3]]), c.equals(3));
    let four = iff(is(spec, &[&[4], &[2, 4], &[2, 2, 2], &[3, 3, 3]]), c.equals(4));
    let detail = format!(
        "c = {c} ({}), D = {davenport}; c=D: {}, c=3: {}, c=4: {}",
        catenary.reason,
        tri(c.equals(davenport)),
        tri(c.equals(3)),
        tri(c.equals(4))
    );
    Verdict::new(Target::CatenaryClasses, worst(&[range, top, three, four]), detail)
}

/// `G ≅ C2^{r-1}⊕C4 (r ≥ 2)` or `C2⊕C2n (n ≥ 2)` ⇔ `ℸ(G) = D(G) − 1` ⇔
/// `c(G) = D(G) − 1`.
pub fn verify_near_maximal(spec: &GroupSpec, davenport: usize, daleth: &Daleth, catenary: &CatenaryDegree) -> Verdict {
    if spec.order() < 3 {
        return Verdict::new(Target::NearMaximal, Status::NotApplicable, "requires |G| >= 3");
    }
    let special = spec.is_c2_power_c4() || spec.is_c2_c2n();
    let target = davenport - 1;
    let by_daleth = iff(special, Some(daleth.value == target));
    let by_catenary = iff(special, catenary.value.equals(target));
    let detail = format!(
        "special class: {special}; daleth = {} (D-1 = {target}); c = D-1: {}",
        daleth.value,
        tri(catenary.value.equals(target))
    );
    let mut v = Verdict::new(Target::NearMaximal, worst(&[by_daleth, by_catenary]), detail);
    if by_daleth == Status::Fails {
        v.witness = daleth.witness.clone();
    }
    v
}

/// The pair family and length pattern searched for a target, as
/// `(|U|, |V|, L(UV))` in terms of `D = D(G)`.
fn pair_pattern(target: Target, d: usize) -> Option<(usize, usize, BTreeSet<usize>)> {
    let pat = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
    match target {
        // D ∈ L(UV) forces |U| = |V| = D
        Target::FullPairTop => Some((d, d, pat(&[2, d - 1, d]))),
        Target::FullPairGap => Some((d, d, pat(&[2, d - 1]))),
        Target::MixedPairGap => Some((d, d - 1, pat(&[2, d - 1]))),
        Target::ShortPairGap => Some((d - 1, d - 1, pat(&[2, d - 1]))),
        _ => None,
    }
}

/// Whether a matching pair exists for `spec` according to the known
/// classification.
pub fn pair_pattern_predicate(target: Target, spec: &GroupSpec) -> bool {
    match target {
        Target::FullPairTop => spec.is_c2_c2n(),
        Target::FullPairGap => false,
        Target::MixedPairGap => spec.is_elementary_2() || spec.is_cyclic() || spec.is_c2_c2n(),
        Target::ShortPairGap => spec.is_elementary_2() || spec.is_c2_power_c4() || spec.is_c2_c2n(),
        _ => false,
    }
}

/// Exhaustive search for pairs `U, V` with the target's sizes and length
/// set. Requires `D(G) ≥ 5`.
pub fn verify_pair_pattern(space: &PairSpace<'_>, target: Target, limits: &Limits) -> Result<Verdict> {
    let atoms = space.atoms();
    let d = atoms.davenport();
    let spec = atoms.group().spec();
    let Some((a, b, pattern)) = pair_pattern(target, d) else {
        return Err(Error::Domain(format!("{target} is not a two-atom pattern")));
    };
    if d < 5 {
        return Ok(Verdict::new(target, Status::NotApplicable, format!("D(G) = {d} < 5")));
    }
    let pairs = space.pairs_of_lengths(a, b);
    let lens = pair_lengths(space, &pairs, &limits.budget())?;
    let mut witness = None;
    let mut matches = 0;
    for (&(u, v), &bits) in pairs.iter().zip(&lens) {
        if bits_to_set(bits) == pattern {
            matches += 1;
            if witness.is_none() {
                witness = Some(PairWitness::new(space.atom(u), space.atom(v), bits));
            }
        }
    }
    let predicate = pair_pattern_predicate(target, spec);
    let found = witness.is_some();
    let construction = construction(atoms.group(), target)
        .map(|(u, v)| {
            let mut engine = LengthEngine::new(atoms.group());
            let bits = engine.lengths(&u.product(&v)?.counts());
            Ok(PairWitness::new(&u, &v, bits))
        })
        .transpose()?;
    let construction_ok = construction.as_ref().is_none_or(|c| c.lengths == pattern);
    let status = if found == predicate && construction_ok { Status::Holds } else { Status::Fails };
    let detail = format!(
        "searched |U| = {a}, |V| = {b} for L = {pattern:?}: {matches} match(es) among {} pairs; predicate {predicate}",
        pairs.len()
    );
    let mut v = Verdict::new(target, status, detail);
    v.witness = witness;
    v.construction = construction;
    v.pairs_examined = Some(pairs.len());
    v.matches = Some(matches);
    Ok(v)
}

/// The explicit pair realizing a pattern on its group class, built from
/// the standard basis `e_1, …, e_r`.
pub fn construction(group: &Arc<Group>, target: Target) -> Option<(Sequence, Sequence)> {
    let spec = group.spec();
    let basis = group.basis();
    let r = basis.len();
    let seq = |idx: Vec<usize>| Sequence::from_indices(group.clone(), idx);
    let sum = |xs: &[usize]| xs.iter().fold(0, |acc, &x| group.add_idx(acc, x));
    let neg = |xs: &[usize]| xs.iter().map(|&x| group.neg_idx(x)).collect::<Vec<_>>();
    let power = |x: usize, k: usize| std::iter::repeat_n(x, k).collect::<Vec<_>>();
    match target {
        Target::FullPairTop if spec.is_c2_c2n() => {
            let (e1, e2) = (basis[0], basis[1]);
            let two_n = spec.exponent() as usize;
            let mut u = vec![e1, group.add_idx(e1, e2)];
            u.extend(power(e2, two_n - 1));
            let v = neg(&u);
            Some((seq(u), seq(v)))
        }
        Target::MixedPairGap if spec.is_elementary_2() => {
            let e0 = sum(&basis);
            let mut u = basis.clone();
            u.push(e0);
            let mut v = basis[..r - 1].to_vec();
            v.push(group.add_idx(e0, basis[r - 1]));
            Some((seq(u), seq(v)))
        }
        Target::MixedPairGap if spec.is_cyclic() => {
            let e = basis[0];
            let n = spec.exponent() as usize;
            let u = power(e, n);
            let mut v = power(group.neg_idx(e), n - 2);
            v.push(group.neg_idx(group.add_idx(e, e)));
            Some((seq(u), seq(v)))
        }
        Target::MixedPairGap if spec.is_c2_c2n() => {
            let (e1, e2) = (basis[0], basis[1]);
            let two_n = spec.exponent() as usize;
            let mut u = vec![e1, group.add_idx(e1, e2)];
            u.extend(power(e2, two_n - 1));
            let v = power(group.neg_idx(e2), two_n);
            Some((seq(u), seq(v)))
        }
        Target::ShortPairGap if spec.is_elementary_2() => {
            let mut u = basis[..r - 1].to_vec();
            u.push(sum(&basis[..r - 1]));
            let v = neg(&u);
            Some((seq(u), seq(v)))
        }
        Target::ShortPairGap if spec.is_c2_power_c4() => {
            let e_r = basis[r - 1];
            let e0 = sum(&basis);
            let mut u = basis[..r - 1].to_vec();
            u.extend([e_r, e_r, group.add_idx(e0, e_r)]);
            let v = neg(&u);
            Some((seq(u), seq(v)))
        }
        Target::ShortPairGap if spec.is_c2_c2n() => {
            let e2 = basis[1];
            let u = power(e2, spec.exponent() as usize);
            let v = neg(&u);
            Some((seq(u), seq(v)))
        }
        _ => None,
    }
}

/// If `L(UV) ∩ [3, ord(g)] = ∅` for some `g`, then `v_g(U) + v_{−g}(V) ≤ ord(g)`.
///
/// The statement assumes `max L(UV) ≥ 3`; below that it holds vacuously.
pub fn cyclic_multiplicity_filter(u: &Sequence, v: &Sequence, lengths: &BTreeSet<usize>) -> bool {
    if lengths.iter().max().is_none_or(|&m| m < 3) {
        return true;
    }
    let group = u.group();
    (0..group.order()).all(|g| {
        let ord = group.order_idx(g) as usize;
        let hits = ord >= 3 && lengths.range(3..=ord).next().is_some();
        hits || (u.multiplicity_idx(g) + v.multiplicity_idx(group.neg_idx(g))) as usize <= ord
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{enumerate_atoms, AtomSet};
    use crate::factorization::lengths;
    use crate::invariants::{catenary_group, daleth, Catenary, CatenaryReason};

    fn atoms(s: &str) -> AtomSet {
        let g = Arc::new(Group::new(GroupSpec::parse(s).unwrap()).unwrap());
        enumerate_atoms(&g, &Limits::default()).unwrap()
    }

    fn seq(g: &Arc<Group>, s: &str) -> Sequence {
        Sequence::parse(g.clone(), s).unwrap()
    }

    #[test]
    fn target_names_round_trip() {
        for t in Target::ALL {
            assert_eq!(t.name().parse::<Target>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.name()));
        }
        assert!("pair-9".parse::<Target>().is_err());
    }

    #[test]
    fn near_maximal_examples() {
        let lim = Limits::default();
        for (s, special, dal) in [("2,4", true, 4), ("3,3", false, 3), ("5", false, 5)] {
            let a = atoms(s);
            let space = PairSpace::new(&a, 100_000).unwrap();
            let d = daleth(&space, &lim).unwrap();
            assert_eq!(d.value, dal);
            let c = catenary_group(&space, &d, &lim).unwrap();
            let spec = a.group().spec();
            assert_eq!(spec.is_c2_power_c4() || spec.is_c2_c2n(), special);
            let v = verify_near_maximal(spec, a.davenport(), &d, &c);
            assert_eq!(v.status, Status::Holds, "{s}: {}", v.detail);
            assert_eq!(verify_catenary_classes(spec, a.davenport(), &c).status, Status::Holds, "{s}");
        }
    }

    #[test]
    fn wrong_inputs_are_caught() {
        let spec = GroupSpec::parse("2,4").unwrap();
        let wrong = Daleth { value: 3, witness: None, pairs_examined: 0 };
        let c = CatenaryDegree { value: Catenary::Exact(3), reason: CatenaryReason::BoundsMeet };
        assert_eq!(verify_near_maximal(&spec, 5, &wrong, &c).status, Status::Fails);
        assert_eq!(verify_catenary_classes(&spec, 5, &c).status, Status::Fails);
        let open = CatenaryDegree { value: Catenary::Interval { lo: 3, hi: 5 }, reason: CatenaryReason::IntervalOnly };
        let right = Daleth { value: 4, witness: None, pairs_examined: 0 };
        assert_eq!(verify_near_maximal(&spec, 5, &right, &open).status, Status::Indeterminate);
        let tiny = GroupSpec::parse("2").unwrap();
        assert_eq!(verify_catenary_classes(&tiny, 2, &c).status, Status::NotApplicable);
    }

    #[test]
    fn pair_patterns_on_c2_c4() {
        let lim = Limits::default();
        let a = atoms("2,4");
        let space = PairSpace::new(&a, 1_000).unwrap();
        let v35 = verify_pair_pattern(&space, Target::FullPairTop, &lim).unwrap();
        assert_eq!(v35.status, Status::Holds, "{}", v35.detail);
        let c = v35.construction.unwrap();
        assert_eq!(c.u, "(0,1)^3 (1,0)^1 (1,1)^1");
        assert_eq!(c.lengths, BTreeSet::from([2, 4, 5]));
        assert_eq!(v35.witness.unwrap().lengths, BTreeSet::from([2, 4, 5]));
        let v36 = verify_pair_pattern(&space, Target::FullPairGap, &lim).unwrap();
        assert_eq!((v36.status, v36.matches), (Status::Holds, Some(0)));
        assert!(v36.witness.is_none());
        for t in [Target::MixedPairGap, Target::ShortPairGap] {
            let v = verify_pair_pattern(&space, t, &lim).unwrap();
            assert_eq!(v.status, Status::Holds, "{t}: {}", v.detail);
            assert!(v.witness.is_some());
        }
        let small = atoms("2,2");
        let sp = PairSpace::new(&small, 100).unwrap();
        assert_eq!(verify_pair_pattern(&sp, Target::FullPairTop, &lim).unwrap().status, Status::NotApplicable);
        assert!(verify_pair_pattern(&space, Target::CatenaryClasses, &lim).is_err());
    }

    #[test]
    fn short_pair_construction_on_c2_c2_c4() {
        let a = atoms("2,2,4");
        let (u, v) = construction(a.group(), Target::ShortPairGap).unwrap();
        assert!(a.contains(&u) && a.contains(&v));
        assert_eq!(u.len(), a.davenport() - 1);
        let l = lengths(&u.product(&v).unwrap(), &a, &Limits::default()).unwrap();
        assert_eq!(l, BTreeSet::from([2, 5]));
    }

    #[test]
    fn constructions_are_atoms_with_stated_lengths() {
        let cases: [(&str, Target, &[usize]); 7] = [
            ("2,6", Target::FullPairTop, &[2, 6, 7]),
            ("5", Target::MixedPairGap, &[2, 4]),
            ("6", Target::MixedPairGap, &[2, 5]),
            ("2,2,2,2", Target::MixedPairGap, &[2, 4]),
            ("2,6", Target::MixedPairGap, &[2, 6]),
            ("2,2,2,2", Target::ShortPairGap, &[2, 4]),
            ("2,6", Target::ShortPairGap, &[2, 6]),
        ];
        for (s, t, want) in cases {
            let a = atoms(s);
            let (u, v) = construction(a.group(), t).unwrap();
            assert!(a.contains(&u) && a.contains(&v), "{s} {t}");
            let l = lengths(&u.product(&v).unwrap(), &a, &Limits::default()).unwrap();
            assert_eq!(l, want.iter().copied().collect(), "{s} {t}");
        }
        assert!(construction(atoms("3,3").group(), Target::FullPairTop).is_none());
    }

    #[test]
    fn cyclic_multiplicity_examples() {
        let lim = Limits::default();
        let a = atoms("2,4");
        for u in a.nonzero() {
            for v in a.nonzero() {
                let l = lengths(&u.product(v).unwrap(), &a, &lim).unwrap();
                assert!(cyclic_multiplicity_filter(u, v, &l), "{u} | {v}");
            }
        }
        let c5 = atoms("5");
        let g = c5.group();
        let (u, v) = (seq(g, "(1)^5"), seq(g, "(4)^5"));
        let l = lengths(&u.product(&v).unwrap(), &c5, &lim).unwrap();
        assert_eq!(l, BTreeSet::from([2, 5]));
        assert!(cyclic_multiplicity_filter(&u, &v, &l));
        // a forged length set violating the conclusion is rejected
        assert!(!cyclic_multiplicity_filter(&u, &v, &BTreeSet::from([2, 6])));
        let w = seq(g, "(2)^5");
        let l = lengths(&u.product(&w).unwrap(), &c5, &lim).unwrap();
        assert!(cyclic_multiplicity_filter(&u, &w, &l));
    }
}
