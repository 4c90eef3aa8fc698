//! Set functions on a finite ground set, modular pairs and their splittings.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const MAX_GROUND: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        Subset(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1 << i)
    }

    pub fn from_indices(it: impl IntoIterator<Item = usize>) -> Subset {
        Subset(it.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, o: Subset) -> Subset {
        Subset(self.0 | o.0)
    }

    pub fn inter(self, o: Subset) -> Subset {
        Subset(self.0 & o.0)
    }

    pub fn minus(self, o: Subset) -> Subset {
        Subset(self.0 & !o.0)
    }

    pub fn complement(self, n: usize) -> Subset {
        Subset::full(n).minus(self)
    }

    pub fn is_subset_of(self, o: Subset) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn with(self, i: usize) -> Subset {
        Subset(self.0 | 1 << i)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// All `2^n` subsets in increasing mask order.
pub fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    (0..1u32 << n).map(Subset)
}

/// Nonempty proper subsets in increasing mask order.
pub fn proper_subsets(n: usize) -> impl Iterator<Item = Subset> {
    (1..(1u32 << n) - 1).map(Subset)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroundSet {
    labels: Arc<[String]>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<GroundSet> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Parse("ground set is empty".into()));
        }
        if labels.len() > MAX_GROUND {
            return Err(Error::GroundTooLarge(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') {
                return Err(Error::Parse(format!("bad label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::Parse(format!("duplicate label {l:?}")));
            }
        }
        Ok(GroundSet { labels: labels.into() })
    }

    /// Labels `v0, v1, ...`.
    pub fn indexed(n: usize) -> Result<GroundSet> {
        GroundSet::new((0..n).map(|i| format!("v{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn subset<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<Subset> {
        let mut s = Subset::EMPTY;
        for l in labels {
            let i = self.index_of(l).ok_or_else(|| Error::UnknownVertex(l.to_string()))?;
            s = s.with(i);
        }
        Ok(s)
    }

    /// Comma-joined labels in ground order; `""` for the empty set.
    pub fn key(&self, s: Subset) -> String {
        s.iter().map(|i| self.label(i)).collect::<Vec<_>>().join(",")
    }

    pub fn parse_key(&self, key: &str) -> Result<Subset> {
        if key.trim().is_empty() {
            return Ok(Subset::EMPTY);
        }
        self.subset(key.split(',').map(str::trim))
    }
}

impl fmt::Debug for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// Dense table over all subset masks.
#[derive(Clone, PartialEq, Eq)]
pub struct SetFunction {
    ground: GroundSet,
    values: Vec<Rational>,
}

impl SetFunction {
    pub fn new(ground: GroundSet, values: Vec<Rational>) -> Result<SetFunction> {
        if values.len() != 1 << ground.len() {
            return Err(Error::Parse(format!(
                "table has {} entries, expected {}",
                values.len(),
                1 << ground.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::Parse("value at the empty set must be 0".into()));
        }
        Ok(SetFunction { ground, values })
    }

    pub fn from_fn(ground: &GroundSet, mut f: impl FnMut(Subset) -> Rational) -> SetFunction {
        let values = all_subsets(ground.len()).map(&mut f).collect();
        SetFunction { ground: ground.clone(), values }
    }

    pub fn zero(ground: &GroundSet) -> SetFunction {
        SetFunction::from_fn(ground, |_| Rational::zero())
    }

    /// The modular function `I ↦ q(I)`.
    pub fn modular(ground: &GroundSet, q: &[Rational]) -> SetFunction {
        assert_eq!(q.len(), ground.len());
        SetFunction::from_fn(ground, |s| s.iter().map(|i| &q[i]).sum())
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn get(&self, s: Subset) -> &Rational {
        &self.values[s.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn total(&self) -> &Rational {
        self.get(self.ground.full())
    }

    pub fn scale(&self, c: &Rational) -> SetFunction {
        SetFunction { ground: self.ground.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, o: &SetFunction) -> Result<SetFunction> {
        if self.ground != o.ground {
            return Err(Error::GroundMismatch);
        }
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect();
        Ok(SetFunction { ground: self.ground.clone(), values })
    }

    /// Same function with the ground relabelled in another order.
    pub fn reindexed(&self, target: &GroundSet) -> Result<SetFunction> {
        if target.len() != self.n() {
            return Err(Error::GroundMismatch);
        }
        let map: Vec<usize> = target
            .labels()
            .iter()
            .map(|l| self.ground.index_of(l).ok_or(Error::GroundMismatch))
            .collect::<Result<_>>()?;
        Ok(SetFunction::from_fn(target, |s| {
            self.get(Subset::from_indices(s.iter().map(|i| map[i]))).clone()
        }))
    }

    pub fn is_modular(&self) -> bool {
        let q: Vec<Rational> = (0..self.n()).map(|i| self.get(Subset::singleton(i)).clone()).collect();
        *self == SetFunction::modular(&self.ground, &q)
    }

    pub fn to_json(&self) -> Value {
        let mut values = Map::new();
        for s in all_subsets(self.n()) {
            values.insert(self.ground.key(s), rational::to_json(self.get(s)));
        }
        json!({ "ground": self.ground.labels(), "values": values })
    }

    pub fn from_json(v: &Value) -> Result<SetFunction> {
        let ground = v
            .get("ground")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"ground\"".into()))?;
        let labels = ground
            .iter()
            .map(|l| l.as_str().map(str::to_string).ok_or_else(|| Error::Parse("label must be a string".into())))
            .collect::<Result<Vec<_>>>()?;
        let ground = GroundSet::new(labels)?;
        let table = v
            .get("values")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("missing \"values\"".into()))?;
        let mut values = vec![None; 1 << ground.len()];
        for (k, x) in table {
            let s = ground.parse_key(k)?;
            values[s.index()] = Some(rational::from_json(x)?);
        }
        if values[0].is_none() {
            values[0] = Some(Rational::zero());
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| Error::Parse(format!("missing value for {:?}", ground.key(Subset(i as u32))))))
            .collect::<Result<Vec<_>>>()?;
        SetFunction::new(ground, values)
    }
}

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for s in all_subsets(self.n()) {
            m.entry(&format!("{{{}}}", self.ground.key(s)), &rational::format(self.get(s)));
        }
        m.finish()
    }
}

/// Naive check over all pairs.
pub fn is_supermodular(f: &SetFunction) -> bool {
    if !f.get(Subset::EMPTY).is_zero() {
        return false;
    }
    let n = f.n();
    for a in all_subsets(n) {
        for b in all_subsets(n).filter(|b| b.0 > a.0) {
            if a.is_subset_of(b) || b.is_subset_of(a) {
                continue;
            }
            if f.get(a) + f.get(b) > f.get(a.union(b)) + f.get(a.inter(b)) {
                return false;
            }
        }
    }
    true
}

/// Checks `f(S+i) + f(S+j) ≤ f(S+i+j) + f(S)` only.
pub fn is_supermodular_local(f: &SetFunction) -> bool {
    if !f.get(Subset::EMPTY).is_zero() {
        return false;
    }
    let n = f.n();
    for s in all_subsets(n) {
        for i in (0..n).filter(|&i| !s.contains(i)) {
            for j in (i + 1..n).filter(|&j| !s.contains(j)) {
                if f.get(s.with(i)) + f.get(s.with(j)) > f.get(s.with(i).with(j)) + f.get(s) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_submodular(f: &SetFunction) -> bool {
    is_supermodular(&f.scale(&rational::int(-1)))
}

pub fn adjoint(f: &SetFunction) -> SetFunction {
    let full = f.ground().full();
    let total = f.total().clone();
    SetFunction::from_fn(f.ground(), |s| &total - f.get(full.minus(s)))
}

pub fn restrict_contract(f: &SetFunction, j1: Subset, j2: Subset) -> Result<SetFunction> {
    if !j1.is_subset_of(j2) || !j2.is_subset_of(f.ground().full()) {
        return Err(Error::InvalidNesting);
    }
    let base = f.get(j1).clone();
    Ok(SetFunction::from_fn(f.ground(), |s| f.get(s.inter(j2).union(j1)) - &base))
}

#[derive(Clone, PartialEq, Eq)]
pub struct ModularPair {
    pub mu: SetFunction,
    pub mu_star: SetFunction,
}

impl ModularPair {
    /// Pairs a supermodular function with its adjoint.
    pub fn from_mu(mu: SetFunction) -> ModularPair {
        let mu_star = adjoint(&mu);
        ModularPair { mu, mu_star }
    }

    pub fn new(mu: SetFunction, mu_star: SetFunction) -> Result<ModularPair> {
        if mu.ground() != mu_star.ground() {
            return Err(Error::GroundMismatch);
        }
        if adjoint(&mu) != mu_star {
            return Err(Error::NotAdjoint("mu_star is not the adjoint of mu".into()));
        }
        for s in all_subsets(mu.n()) {
            if mu.get(s) > mu_star.get(s) {
                return Err(Error::NotAdjoint(format!("mu > mu_star at {{{}}}", mu.ground().key(s))));
            }
        }
        Ok(ModularPair { mu, mu_star })
    }

    pub fn modular(ground: &GroundSet, q: &[Rational]) -> ModularPair {
        ModularPair::from_mu(SetFunction::modular(ground, q))
    }

    pub fn ground(&self) -> &GroundSet {
        self.mu.ground()
    }

    pub fn n(&self) -> usize {
        self.mu.n()
    }

    pub fn range(&self) -> &Rational {
        self.mu.total()
    }

    pub fn is_simple(&self) -> bool {
        self.n() == 1 || spread(self) > Rational::zero()
    }
}

impl fmt::Debug for ModularPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModularPair({:?})", self.mu)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    n: usize,
    parts: Vec<Subset>,
}

impl OrderedPartition {
    pub fn new(n: usize, parts: Vec<Subset>) -> Result<OrderedPartition> {
        let mut seen = Subset::EMPTY;
        for &p in &parts {
            if p.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            if !p.inter(seen).is_empty() {
                return Err(Error::InvalidPartition("parts overlap".into()));
            }
            seen = seen.union(p);
        }
        if seen != Subset::full(n) {
            return Err(Error::InvalidPartition("parts do not cover the ground set".into()));
        }
        Ok(OrderedPartition { n, parts })
    }

    pub fn whole(n: usize) -> OrderedPartition {
        OrderedPartition { n, parts: vec![Subset::full(n)] }
    }

    pub fn bipartition(n: usize, i: Subset) -> Result<OrderedPartition> {
        OrderedPartition::new(n, vec![i, i.complement(n)])
    }

    pub fn singletons(order: &[usize]) -> Result<OrderedPartition> {
        OrderedPartition::new(order.len(), order.iter().map(|&i| Subset::singleton(i)).collect())
            .map_err(|_| Error::InvalidPermutation)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[Subset] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `F_0 = ∅, F_1 = π_1, F_2 = π_1 ∪ π_2, ...`
    pub fn flags(&self) -> Vec<Subset> {
        let mut out = vec![Subset::EMPTY];
        for &p in &self.parts {
            out.push(out.last().unwrap().union(p));
        }
        out
    }

    pub fn reversed(&self) -> OrderedPartition {
        OrderedPartition { n: self.n, parts: self.parts.iter().rev().copied().collect() }
    }

    pub fn permuted(&self, order: &[usize]) -> OrderedPartition {
        OrderedPartition { n: self.n, parts: order.iter().map(|&i| self.parts[i]).collect() }
    }

    /// `(π'_1∩π_1, …, π'_l∩π_1, π'_1∩π_2, …)` with empty parts dropped.
    pub fn induced_refinement(&self, other: &OrderedPartition) -> OrderedPartition {
        let mut parts = Vec::new();
        for &p in &self.parts {
            for &q in &other.parts {
                let r = p.inter(q);
                if !r.is_empty() {
                    parts.push(r);
                }
            }
        }
        OrderedPartition { n: self.n, parts }
    }
}

/// `μ_π = Σ μ_{F_i/F_{i−1}}` paired with its adjoint.
pub fn split(pair: &ModularPair, pi: &OrderedPartition) -> Result<ModularPair> {
    if pi.n() != pair.n() {
        return Err(Error::InvalidPartition("partition is over a different ground set".into()));
    }
    let flags = pi.flags();
    let mu = &pair.mu;
    let split_mu = SetFunction::from_fn(mu.ground(), |s| {
        flags
            .windows(2)
            .map(|w| mu.get(s.inter(w[1]).union(w[0])) - mu.get(w[0]))
            .sum()
    });
    Ok(ModularPair::from_mu(split_mu))
}

/// Largest `s` with `μ = μ_π` for an `s`-partition, with a witness.
pub fn codimension(pair: &ModularPair) -> (usize, OrderedPartition) {
    let n = pair.n();
    let mu = &pair.mu;
    let total = mu.total();
    // atoms of the common refinement of all additive bipartitions
    let mut atoms = vec![Subset::full(n)];
    for i in proper_subsets(n) {
        if mu.get(i) + mu.get(i.complement(n)) != *total {
            continue;
        }
        atoms = atoms
            .iter()
            .flat_map(|&a| [a.inter(i), a.minus(i)])
            .filter(|a| !a.is_empty())
            .collect();
    }
    atoms.sort();
    (atoms.len(), OrderedPartition { n, parts: atoms })
}

pub fn spread(pair: &ModularPair) -> Rational {
    proper_subsets(pair.n())
        .map(|s| pair.mu_star.get(s) - pair.mu.get(s))
        .min()
        .unwrap_or_else(Rational::zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationKind {
    Strict,
    Nontrivial,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub i: Subset,
    pub j: Subset,
    pub kind: SeparationKind,
}

impl Separation {
    pub fn is_nontrivial(&self) -> bool {
        self.kind != SeparationKind::Trivial
    }
}

/// Scans bipartitions `(I, J)` in increasing mask order of `I`.
pub fn find_separation(a: &ModularPair, b: &ModularPair) -> Result<Option<Separation>> {
    if a.ground() != b.ground() {
        return Err(Error::GroundMismatch);
    }
    if a.range() != b.range() {
        return Err(Error::RangeMismatch(rational::format(a.range()), rational::format(b.range())));
    }
    let n = a.n();
    let range = a.range();
    let mut trivial = None;
    for i in proper_subsets(n) {
        let j = i.complement(n);
        let lhs = a.mu.get(i) + b.mu.get(j);
        if lhs < *range {
            continue;
        }
        let kind = if lhs > *range {
            SeparationKind::Strict
        } else {
            let pi = OrderedPartition::bipartition(n, i)?;
            if split(a, &pi)? != *a || split(b, &pi)? != *b {
                SeparationKind::Nontrivial
            } else {
                SeparationKind::Trivial
            }
        };
        if kind != SeparationKind::Trivial {
            return Ok(Some(Separation { i, j, kind }));
        }
        if trivial.is_none() {
            trivial = Some(Separation { i, j, kind });
        }
    }
    Ok(trivial)
}
