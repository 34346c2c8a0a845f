//! A model Krull monoid given by its divisor theory: a set of primes, each
//! assigned a class in `G`. Its elements are the products of primes whose
//! classes sum to zero, and sending a prime to its class maps it onto the
//! monoid of zero-sum sequences over `G`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{enumerate_atoms, AtomSet};
use crate::error::{Error, Result};
use crate::factorization::{bits_to_set, factorizations, lengths};
use crate::group::{ElementSet, Group, GroupElement, GroupSpec};
use crate::limits::{Budget, Limits};
use crate::report::SCHEMA_VERSION;
use crate::sequence::{extend_subsums, Sequence};

/// Primes with their classes. Every class contains at least one prime.
#[derive(Debug, Clone)]
pub struct KrullModel {
    group: Arc<Group>,
    primes: Vec<String>,
    class_of: Vec<usize>,
    by_name: HashMap<String, usize>,
}

impl KrullModel {
    pub fn new(group: Arc<Group>, primes: Vec<(String, GroupElement)>) -> Result<Self> {
        let mut names = Vec::with_capacity(primes.len());
        let mut class_of = Vec::with_capacity(primes.len());
        let mut by_name = HashMap::new();
        let mut hit = ElementSet::default();
        for (name, g) in primes {
            let idx = group.index_of(&g)?;
            if by_name.insert(name.clone(), names.len()).is_some() {
                return Err(Error::Structural(format!("prime {name:?} listed twice")));
            }
            hit.insert(idx);
            names.push(name);
            class_of.push(idx);
        }
        if hit.len() != group.order() {
            return Err(Error::Structural(format!(
                "classes of the primes cover {} of the {} elements of {}",
                hit.len(),
                group.order(),
                group.spec()
            )));
        }
        Ok(KrullModel { group, primes: names, class_of, by_name })
    }

    /// One prime `p<i>` in the class with index `i`, for each `i`.
    pub fn one_prime_per_class(group: Arc<Group>) -> Self {
        let primes = (0..group.order()).map(|i| (format!("p{i}"), group.element(i))).collect();
        Self::new(group, primes).expect("surjective by construction")
    }

    /// Between 1 and `max_per_class` primes in every class, named `p<i>_<j>`.
    pub fn random(group: Arc<Group>, max_per_class: usize, rng: &mut impl Rng) -> Self {
        let mut primes = Vec::new();
        for i in 0..group.order() {
            for j in 0..rng.gen_range(1..=max_per_class.max(1)) {
                primes.push((format!("p{i}_{j}"), group.element(i)));
            }
        }
        Self::new(group, primes).expect("surjective by construction")
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn spec(&self) -> &GroupSpec {
        self.group.spec()
    }

    pub fn primes(&self) -> &[String] {
        &self.primes
    }

    pub fn class_of(&self, prime: &str) -> Option<GroupElement> {
        self.by_name.get(prime).map(|&i| self.group.element(self.class_of[i]))
    }

    pub fn primes_in_class(&self, g: &GroupElement) -> Result<Vec<&str>> {
        let idx = self.group.index_of(g)?;
        Ok((0..self.primes.len()).filter(|&i| self.class_of[i] == idx).map(|i| self.primes[i].as_str()).collect())
    }

    fn dense(&self, a: &KrullElement) -> Result<Vec<u32>> {
        let mut out = vec![0u32; self.primes.len()];
        for (name, &e) in &a.exponents {
            let i = *self.by_name.get(name).ok_or_else(|| Error::Domain(format!("unknown prime {name:?}")))?;
            out[i] += e;
        }
        Ok(out)
    }

    fn sparse(&self, dense: &[u32]) -> KrullElement {
        KrullElement {
            exponents: dense
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (self.primes[i].clone(), e))
                .collect(),
        }
    }

    fn class_counts(&self, dense: &[u32]) -> Vec<u32> {
        let mut counts = vec![0u32; self.group.order()];
        for (i, &e) in dense.iter().enumerate() {
            counts[self.class_of[i]] += e;
        }
        counts
    }
}

/// A product of primes, as prime name → exponent (exponents positive).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KrullElement {
    pub exponents: BTreeMap<String, u32>,
}

impl KrullElement {
    pub fn new<S: Into<String>>(exponents: impl IntoIterator<Item = (S, u32)>) -> Self {
        let mut out = KrullElement::default();
        for (p, e) in exponents {
            if e > 0 {
                *out.exponents.entry(p.into()).or_default() += e;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.exponents.values().map(|&e| e as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn mul(&self, other: &KrullElement) -> KrullElement {
        let mut out = self.clone();
        for (p, &e) in &other.exponents {
            *out.exponents.entry(p.clone()).or_default() += e;
        }
        out
    }
}

impl fmt::Display for KrullElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.exponents.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// The image of `a` in the block monoid: each prime replaced by its class.
pub fn beta(a: &KrullElement, model: &KrullModel) -> Result<Sequence> {
    let dense = model.dense(a)?;
    let seq = Sequence::from_counts(model.group.clone(), &model.class_counts(&dense));
    if !seq.is_zero_sum() {
        return Err(Error::Domain(format!("{a} has class sum {}, not in the monoid", seq.sigma())));
    }
    Ok(seq)
}

/// Factorization search over prime multisets. Atoms are found directly from
/// the classes, without going through the block monoid.
struct Native<'m> {
    model: &'m KrullModel,
    memo: HashMap<Vec<u32>, u128>,
    budget: Budget,
}

impl<'m> Native<'m> {
    /// Atoms of the monoid dividing `rest` that contain the least prime of
    /// `rest`, as dense exponent vectors.
    fn atoms_through_min(&self, rest: &[u32]) -> Result<Vec<Vec<u32>>> {
        let first = rest.iter().position(|&e| e > 0).expect("nonempty");
        let mut out = Vec::new();
        let mut cur = vec![0u32; rest.len()];
        cur[first] = 1;
        let g = self.model.class_of[first];
        if g == 0 {
            out.push(cur);
            return Ok(out);
        }
        let reach = extend_subsums(&self.model.group, &ElementSet::default(), g);
        self.grow(rest, first, g, reach, &mut cur, &mut out)?;
        Ok(out)
    }

    /// Extends the zero-sum free `cur` by primes of index `≥ from`. A sequence
    /// whose every proper prefix is zero-sum free and whose sum is zero is an
    /// atom.
    fn grow(
        &self,
        rest: &[u32],
        from: usize,
        sum: usize,
        reach: ElementSet,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        self.budget.tick()?;
        let group = &self.model.group;
        for i in from..rest.len() {
            if cur[i] >= rest[i] {
                continue;
            }
            let g = self.model.class_of[i];
            let s = group.add_idx(sum, g);
            cur[i] += 1;
            if s == 0 {
                out.push(cur.clone());
            } else {
                let next = extend_subsums(group, &reach, g);
                if !next.contains(0) {
                    self.grow(rest, i, s, next, cur, out)?;
                }
            }
            cur[i] -= 1;
        }
        Ok(())
    }

    fn lengths(&mut self, rest: &[u32]) -> Result<u128> {
        if rest.iter().all(|&e| e == 0) {
            return Ok(1);
        }
        if let Some(&l) = self.memo.get(rest) {
            return Ok(l);
        }
        let mut acc = 0u128;
        for atom in self.atoms_through_min(rest)? {
            let smaller: Vec<u32> = rest.iter().zip(&atom).map(|(r, a)| r - a).collect();
            acc |= self.lengths(&smaller)? << 1;
        }
        self.memo.insert(rest.to_vec(), acc);
        Ok(acc)
    }

    fn factorizations(
        &self,
        rest: &[u32],
        cap: usize,
        out: &mut Vec<Vec<Vec<u32>>>,
        stack: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        if rest.iter().all(|&e| e == 0) {
            if out.len() >= cap {
                return Err(Error::Resource(format!("more than {cap} factorizations")));
            }
            out.push(stack.clone());
            return Ok(());
        }
        for atom in self.atoms_through_min(rest)? {
            let smaller: Vec<u32> = rest.iter().zip(&atom).map(|(r, a)| r - a).collect();
            stack.push(atom);
            self.factorizations(&smaller, cap, out, stack)?;
            stack.pop();
        }
        Ok(())
    }
}

fn check_len(a: &KrullElement, model: &KrullModel, limits: &Limits) -> Result<Vec<u32>> {
    beta(a, model)?;
    // D(G) ≤ |G|, so this default admits every product of two atoms
    let cap = limits.max_block_len.unwrap_or(2 * model.group.order());
    if a.len() > cap {
        return Err(Error::Resource(format!("element of length {} exceeds the cap {cap}", a.len())));
    }
    model.dense(a)
}

/// The set of lengths of `a` in the Krull monoid, computed over the primes.
pub fn lengths_in_h(a: &KrullElement, model: &KrullModel, limits: &Limits) -> Result<BTreeSet<usize>> {
    let dense = check_len(a, model, limits)?;
    let mut native = Native { model, memo: HashMap::new(), budget: limits.budget() };
    Ok(bits_to_set(native.lengths(&dense)?))
}

/// All factorizations of `a` into atoms of the Krull monoid, each a sorted
/// list of atoms, in a fixed order.
pub fn factorizations_in_h(a: &KrullElement, model: &KrullModel, limits: &Limits) -> Result<Vec<Vec<KrullElement>>> {
    let dense = check_len(a, model, limits)?;
    let native = Native { model, memo: HashMap::new(), budget: limits.budget() };
    let mut raw = Vec::new();
    native.factorizations(&dense, limits.max_factorizations, &mut raw, &mut Vec::new())?;
    let mut out: Vec<Vec<KrullElement>> = raw
        .into_iter()
        .map(|z| {
            let mut z: Vec<KrullElement> = z.iter().map(|x| model.sparse(x)).collect();
            z.sort();
            z
        })
        .collect();
    // the least prime may lie in several atoms of one factorization, so the
    // recursion reaches such a factorization once per choice of that atom
    out.sort();
    out.dedup();
    Ok(out)
}

/// A random element of the monoid with at most `max_len` prime factors.
pub fn random_element(model: &KrullModel, max_len: usize, rng: &mut impl Rng) -> KrullElement {
    let group = &model.group;
    let n = model.primes.len();
    let len = rng.gen_range(0..max_len.max(1));
    let mut dense = vec![0u32; n];
    let mut sum = 0;
    for _ in 0..len {
        let p = rng.gen_range(0..n);
        dense[p] += 1;
        sum = group.add_idx(sum, model.class_of[p]);
    }
    if len > 0 || sum != 0 {
        let closing = group.neg_idx(sum);
        let candidates: Vec<usize> = (0..n).filter(|&i| model.class_of[i] == closing).collect();
        dense[candidates[rng.gen_range(0..candidates.len())]] += 1;
    }
    model.sparse(&dense)
}

/// Groups of order at most 8 used for random models.
pub const SMALL_GROUPS: [&[u32]; 9] = [&[2], &[3], &[4], &[5], &[6], &[7], &[8], &[2, 2], &[2, 4]];

/// Outcome of [`transfer_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub models: usize,
    pub elements_checked: usize,
    pub products_checked: usize,
    pub bijections_checked: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Random models and elements; checks that lengths agree with the image in
/// the block monoid, that the class map is multiplicative, and, for models
/// with one prime per class, that factorizations correspond one to one.
///
/// Without a fixed group each model draws its group from [`SMALL_GROUPS`].
pub fn transfer_check(
    group: Option<&GroupSpec>,
    models: usize,
    elements_per_model: usize,
    seed: u64,
    limits: &Limits,
) -> Result<TransferSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atom_sets: BTreeMap<GroupSpec, AtomSet> = BTreeMap::new();
    let mut summary = TransferSummary {
        schema_version: SCHEMA_VERSION,
        seed,
        models,
        elements_checked: 0,
        products_checked: 0,
        bijections_checked: 0,
        failures: Vec::new(),
        passed: false,
    };
    for m in 0..models {
        let spec = match group {
            Some(s) => s.clone(),
            None => GroupSpec::from_cyclic_orders(SMALL_GROUPS[rng.gen_range(0..SMALL_GROUPS.len())])?,
        };
        if !atom_sets.contains_key(&spec) {
            let g = Arc::new(Group::with_cap(spec.clone(), limits.max_group_order)?);
            atom_sets.insert(spec.clone(), enumerate_atoms(&g, limits)?);
        }
        let atoms = &atom_sets[&spec];
        let group = atoms.group().clone();
        let model =
            if m % 4 == 0 { KrullModel::one_prime_per_class(group) } else { KrullModel::random(group, 3, &mut rng) };
        let single = model.primes.len() == model.group.order();
        let max_len = 2 * atoms.davenport();
        let mut fails: Vec<String> = Vec::new();
        let mut previous: Option<KrullElement> = None;
        for _ in 0..elements_per_model {
            let a = random_element(&model, max_len, &mut rng);
            let b = beta(&a, &model)?;
            let native = lengths_in_h(&a, &model, limits)?;
            let image = lengths(&b, atoms, limits)?;
            summary.elements_checked += 1;
            if native != image {
                fails.push(format!("{a}: lengths {native:?} in the monoid, {image:?} for {b}"));
            }
            if let Some(p) = previous.replace(a.clone()) {
                let ab = beta(&a.mul(&p), &model)?;
                let prod = b.product(&beta(&p, &model)?)?;
                summary.products_checked += 1;
                if ab != prod {
                    fails.push(format!("class map not multiplicative on {a} and {p}"));
                }
            }
            if single {
                let zh = factorizations_in_h(&a, &model, limits)?;
                let zb = factorizations(&b, atoms, limits)?;
                let mut mapped: Vec<Vec<Sequence>> = zh
                    .iter()
                    .map(|z| z.iter().map(|x| beta(x, &model)).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?;
                for z in &mut mapped {
                    z.sort();
                }
                mapped.sort();
                let mut direct: Vec<Vec<Sequence>> = zb.factorizations().iter().map(|f| f.parts().to_vec()).collect();
                direct.sort();
                summary.bijections_checked += 1;
                if mapped != direct {
                    fails.push(format!("{a}: {} factorizations in the monoid, {} for {b}", zh.len(), direct.len()));
                }
            }
        }
        summary.failures.extend(fails.into_iter().map(|f| format!("model {m} over {spec}: {f}")));
    }
    summary.passed = summary.failures.is_empty();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(s: &str) -> Arc<Group> {
        Arc::new(Group::new(GroupSpec::parse(s).unwrap()).unwrap())
    }

    fn el(g: &Arc<Group>, r: &[i64]) -> GroupElement {
        GroupElement::new(g.spec(), r).unwrap()
    }

    #[test]
    fn construction_requires_every_class() {
        let g = grp("3");
        let partial = vec![("p".to_string(), el(&g, &[0])), ("q".to_string(), el(&g, &[1]))];
        assert!(matches!(KrullModel::new(g.clone(), partial), Err(Error::Structural(_))));
        let twice =
            vec![("p".to_string(), el(&g, &[0])), ("p".to_string(), el(&g, &[1])), ("q".to_string(), el(&g, &[2]))];
        assert!(KrullModel::new(g.clone(), twice).is_err());
        let m = KrullModel::one_prime_per_class(g.clone());
        assert_eq!(m.primes().len(), 3);
        assert_eq!(m.class_of("p2"), Some(el(&g, &[2])));
        assert_eq!(m.primes_in_class(&el(&g, &[1])).unwrap(), vec!["p1"]);
    }

    #[test]
    fn beta_examples() {
        let g = grp("4");
        let m = KrullModel::one_prime_per_class(g.clone());
        let a = KrullElement::new([("p1", 4)]);
        assert_eq!(beta(&a, &m).unwrap().to_string(), "(1)^4");
        assert!(beta(&KrullElement::default(), &m).unwrap().is_empty());
        assert!(matches!(beta(&KrullElement::new([("p1", 3)]), &m), Err(Error::Domain(_))));
        assert!(matches!(beta(&KrullElement::new([("zz", 1)]), &m), Err(Error::Domain(_))));

        let c2 = grp("2");
        let two = KrullModel::new(
            c2.clone(),
            vec![("o".into(), el(&c2, &[0])), ("p".into(), el(&c2, &[1])), ("q".into(), el(&c2, &[1]))],
        )
        .unwrap();
        let pq = KrullElement::new([("p", 1), ("q", 1)]);
        assert_eq!(beta(&pq, &two).unwrap().to_string(), "(1)^2");
        assert_eq!(lengths_in_h(&pq, &two, &Limits::default()).unwrap(), BTreeSet::from([1]));
        assert_eq!(factorizations_in_h(&pq, &two, &Limits::default()).unwrap(), vec![vec![pq.clone()]]);
    }

    #[test]
    fn lengths_of_known_elements() {
        let g = grp("2,4");
        let m = KrullModel::one_prime_per_class(g.clone());
        let u = Sequence::parse(g.clone(), "(1,0)(0,1)^3(1,1)").unwrap();
        let uv = u.product(&u.negate()).unwrap();
        let name = |i: usize| format!("p{i}");
        let a = KrullElement::new(uv.terms().iter().map(|&(i, k)| (name(i as usize), k)));
        assert_eq!(lengths_in_h(&a, &m, &Limits::default()).unwrap(), BTreeSet::from([2, 4, 5]));
        let single = KrullElement::new(u.terms().iter().map(|&(i, k)| (name(i as usize), k)));
        assert_eq!(lengths_in_h(&single, &m, &Limits::default()).unwrap(), BTreeSet::from([1]));
        let short = Limits { max_block_len: Some(5), ..Limits::default() };
        assert!(lengths_in_h(&a, &m, &short).unwrap_err().is_resource());
    }

    #[test]
    fn several_primes_per_class() {
        // p, q both of class 1 in C3: p^3, q^3, p^2 q, p q^2 are atoms, and
        // p^3 q^3 = (p^2 q)(p q^2) as well, so L = {2}
        let g = grp("3");
        let m = KrullModel::new(
            g.clone(),
            vec![
                ("o".into(), el(&g, &[0])),
                ("p".into(), el(&g, &[1])),
                ("q".into(), el(&g, &[1])),
                ("r".into(), el(&g, &[2])),
            ],
        )
        .unwrap();
        let a = KrullElement::new([("p", 3), ("q", 3)]);
        let z = factorizations_in_h(&a, &m, &Limits::default()).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(lengths_in_h(&a, &m, &Limits::default()).unwrap(), BTreeSet::from([2]));
        let b = KrullElement::new([("p", 2), ("q", 1), ("r", 3)]);
        assert_eq!(lengths_in_h(&b, &m, &Limits::default()).unwrap(), BTreeSet::from([2, 3]));
    }

    #[test]
    fn random_models_transfer_lengths() {
        let s = transfer_check(None, 40, 5, 7, &Limits::default()).unwrap();
        assert!(s.passed, "{:?}", s.failures);
        assert_eq!(s.elements_checked, 200);
        assert!(s.bijections_checked >= 50);
        assert_eq!(s, transfer_check(None, 40, 5, 7, &Limits::default()).unwrap());
    }
}
