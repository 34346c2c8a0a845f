//! One-shot computation of every group invariant plus all verdicts, in a
//! serializable form.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::atoms::{enumerate_atoms, AtomSet};
use crate::error::Result;
use crate::group::{Group, GroupSpec};
use crate::invariants::{
    catenary_group, daleth, daleth_lower_bound, delta_observed, rho, Catenary, CatenaryReason, PairWitness,
};
use crate::limits::Limits;
use crate::orbits::PairSpace;
use crate::verify::{verify_catenary_classes, verify_near_maximal, verify_pair_pattern, Status, Target, Verdict};

/// Version of every JSON document produced by this crate and its CLI.
pub const SCHEMA_VERSION: u32 = 1;

/// Groups covering each case of the characterizations with `D(G) ≤ 7`.
pub const DEFAULT_SUITE: [&[u32]; 13] = [
    &[3],
    &[4],
    &[5],
    &[6],
    &[2, 2],
    &[2, 2, 2],
    &[2, 2, 2, 2],
    &[3, 3],
    &[2, 4],
    &[2, 6],
    &[2, 2, 4],
    &[3, 3, 3],
    &[4, 4],
];

pub fn default_suite() -> Vec<GroupSpec> {
    DEFAULT_SUITE.iter().map(|f| GroupSpec::from_cyclic_orders(f).expect("valid suite group")).collect()
}

/// A group with its atoms, the starting point of every group-level query.
#[derive(Debug, Clone)]
pub struct Workbench {
    atoms: AtomSet,
}

impl Workbench {
    pub fn new(spec: GroupSpec, limits: &Limits) -> Result<Self> {
        let group = Arc::new(Group::with_cap(spec, limits.max_group_order)?);
        Ok(Workbench { atoms: enumerate_atoms(&group, limits)? })
    }

    pub fn atoms(&self) -> &AtomSet {
        &self.atoms
    }

    pub fn group(&self) -> &Arc<Group> {
        self.atoms.group()
    }

    /// Orbit-reduced pairs, or unreduced ones when the automorphism group is
    /// larger than `limits.max_automorphisms`.
    pub fn pair_space(&self, limits: &Limits) -> Result<PairSpace<'_>> {
        match PairSpace::new(&self.atoms, limits.max_automorphisms) {
            Err(e) if e.is_resource() => Ok(PairSpace::trivial(&self.atoms)),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub schema_version: u32,
    pub group: String,
    pub invariant_factors: GroupSpec,
    pub davenport: usize,
    pub atom_count: usize,
    pub automorphism_count: usize,
    pub daleth: usize,
    pub daleth_witness: Option<PairWitness>,
    pub daleth_lower_bound: usize,
    pub daleth_pairs_examined: usize,
    /// Absent for groups of order below 3.
    pub catenary: Option<Catenary>,
    pub catenary_exactness_reason: Option<CatenaryReason>,
    pub rho2: usize,
    /// Distances seen in products of two atoms; a subset of the full set.
    pub delta_observed: BTreeSet<usize>,
    pub delta_observed_complete: bool,
    pub verdicts: BTreeMap<Target, Verdict>,
}

impl InvariantReport {
    pub fn compute(spec: &GroupSpec, limits: &Limits) -> Result<Self> {
        let bench = Workbench::new(spec.clone(), limits)?;
        Self::from_workbench(&bench, limits)
    }

    pub fn from_workbench(bench: &Workbench, limits: &Limits) -> Result<Self> {
        let atoms = bench.atoms();
        let spec = atoms.group().spec().clone();
        let d = atoms.davenport();
        let space = bench.pair_space(limits)?;
        let dal = daleth(&space, limits)?;
        let cat = if spec.order() >= 3 { Some(catenary_group(&space, &dal, limits)?) } else { None };
        let rho2 = rho(&space, 2, limits)?;
        let delta = delta_observed(&space, 2 * d, &[], limits)?;

        let mut verdicts = BTreeMap::new();
        if let Some(c) = &cat {
            verdicts.insert(Target::CatenaryClasses, verify_catenary_classes(&spec, d, c));
            verdicts.insert(Target::NearMaximal, verify_near_maximal(&spec, d, &dal, c));
        }
        for t in [Target::FullPairTop, Target::FullPairGap, Target::MixedPairGap, Target::ShortPairGap] {
            verdicts.insert(t, verify_pair_pattern(&space, t, limits)?);
        }

        Ok(InvariantReport {
            schema_version: SCHEMA_VERSION,
            group: spec.to_string(),
            invariant_factors: spec.clone(),
            davenport: d,
            atom_count: atoms.len(),
            automorphism_count: space.automorphism_count(),
            daleth: dal.value,
            daleth_witness: dal.witness,
            daleth_lower_bound: daleth_lower_bound(&spec),
            daleth_pairs_examined: dal.pairs_examined,
            catenary_exactness_reason: cat.as_ref().map(|c| c.reason),
            catenary: cat.map(|c| c.value),
            rho2,
            delta_observed: delta,
            delta_observed_complete: false,
            verdicts,
        })
    }

    /// Consistency conditions every report must satisfy; empty when all hold.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(c) = self.catenary {
            if self.daleth > c.lo() {
                out.push(format!("daleth {} exceeds catenary lower end {}", self.daleth, c.lo()));
            }
            if c.hi() > self.davenport {
                out.push(format!("catenary upper end {} exceeds D(G) = {}", c.hi(), self.davenport));
            }
            if self.daleth < self.daleth_lower_bound {
                out.push(format!("daleth {} below the lower bound {}", self.daleth, self.daleth_lower_bound));
            }
        }
        if self.daleth > 2 && !self.delta_observed.contains(&(self.daleth - 2)) {
            out.push(format!("daleth - 2 = {} missing from observed distances", self.daleth - 2));
        }
        if self.rho2 != self.davenport {
            out.push(format!("rho_2 = {} differs from D(G) = {}", self.rho2, self.davenport));
        }
        out
    }

    /// True when some verdict is false.
    pub fn any_failure(&self) -> bool {
        self.verdicts.values().any(Verdict::is_failure)
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.values().all(|v| matches!(v.status, Status::Holds | Status::NotApplicable))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_normalized_and_distinct() {
        let suite = default_suite();
        let names: BTreeSet<String> = suite.iter().map(|s| s.to_string()).collect();
        assert_eq!(names.len(), 13);
        for (s, raw) in suite.iter().zip(DEFAULT_SUITE) {
            assert_eq!(s.factors(), raw);
        }
    }

    #[test]
    fn report_for_c2_c4() {
        let r = InvariantReport::compute(&GroupSpec::parse("2,4").unwrap(), &Limits::default()).unwrap();
        assert_eq!((r.davenport, r.daleth, r.rho2), (5, 4, 5));
        assert_eq!(r.catenary, Some(Catenary::Exact(4)));
        assert_eq!(r.catenary_exactness_reason, Some(CatenaryReason::BoundsMeet));
        assert!(r.violations().is_empty(), "{:?}", r.violations());
        assert!(r.all_hold() && !r.any_failure());
        assert_eq!(r.verdicts.len(), 6);
        assert!(r.delta_observed.is_superset(&BTreeSet::from([1, 2])));
        assert_eq!(r.delta_observed.iter().max(), Some(&2));
        let json = serde_json::to_string(&r).unwrap();
        let back: InvariantReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn report_for_tiny_groups() {
        let r = InvariantReport::compute(&GroupSpec::parse("2").unwrap(), &Limits::default()).unwrap();
        assert_eq!(r.catenary, None);
        assert_eq!(r.rho2, 2);
        assert!(r.delta_observed.is_empty());
        assert!(r.violations().is_empty());
        let r = InvariantReport::compute(&GroupSpec::parse("3").unwrap(), &Limits::default()).unwrap();
        assert_eq!(r.delta_observed, BTreeSet::from([1]));
        assert_eq!(r.catenary, Some(Catenary::Exact(3)));
    }

    #[test]
    fn unreduced_fallback_gives_the_same_report() {
        let spec = GroupSpec::parse("2,2,2").unwrap();
        let full = InvariantReport::compute(&spec, &Limits::default()).unwrap();
        let lim = Limits { max_automorphisms: 2, ..Limits::default() };
        let bare = InvariantReport::compute(&spec, &lim).unwrap();
        assert_eq!(bare.automorphism_count, 1);
        assert_eq!(
            (bare.daleth, bare.catenary, &bare.delta_observed),
            (full.daleth, full.catenary, &full.delta_observed)
        );
        assert_eq!(
            bare.verdicts.values().map(|v| v.status).collect::<Vec<_>>(),
            full.verdicts.values().map(|v| v.status).collect::<Vec<_>>()
        );
    }
}
