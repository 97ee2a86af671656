use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arena::{ArenaTag, ArenaTree, PointId};
use crate::error::{Diagnostic, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKind {
    Virtual,
    Multiplicity,
    Value,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Virtual => "virtual",
            WeightKind::Multiplicity => "multiplicity",
            WeightKind::Value => "value",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "virtual" => Some(WeightKind::Virtual),
            "multiplicity" => Some(WeightKind::Multiplicity),
            "value" => Some(WeightKind::Value),
            _ => None,
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Downward-closed finite set of points with integer weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedCluster<T> {
    arena: ArenaTag,
    kind: WeightKind,
    weights: BTreeMap<PointId, T>,
    carriers: BTreeSet<PointId>,
}

impl<T: Scalar> WeightedCluster<T> {
    pub fn new(
        tree: &ArenaTree,
        kind: WeightKind,
        weights: impl IntoIterator<Item = (PointId, T)>,
    ) -> Result<Self> {
        Self::new_with_carriers(tree, kind, weights, [])
    }

    /// Like [`new`](Self::new), but virtual clusters may give weight zero to
    /// the listed carrier points.
    pub fn new_with_carriers(
        tree: &ArenaTree,
        kind: WeightKind,
        weights: impl IntoIterator<Item = (PointId, T)>,
        carriers: impl IntoIterator<Item = PointId>,
    ) -> Result<Self> {
        let weights: BTreeMap<_, _> = weights.into_iter().collect();
        let carriers: BTreeSet<_> = if kind == WeightKind::Virtual {
            carriers.into_iter().collect()
        } else {
            BTreeSet::new()
        };
        let diags = structural_diagnostics(tree, &weights, &carriers);
        if !diags.is_empty() {
            return Err(Error::Validation(diags));
        }
        Ok(WeightedCluster { arena: tree.tag(), kind, weights, carriers })
    }

    fn from_parts(tree: &ArenaTree, kind: WeightKind, weights: BTreeMap<PointId, T>) -> Self {
        WeightedCluster { arena: tree.tag(), kind, weights, carriers: BTreeSet::new() }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn arena_tag(&self) -> ArenaTag {
        self.arena
    }

    pub fn belongs_to(&self, tree: &ArenaTree) -> bool {
        self.arena == tree.tag()
    }

    pub fn check_arena(&self, tree: &ArenaTree) -> Result<()> {
        if self.belongs_to(tree) {
            Ok(())
        } else {
            Err(Error::ArenaMismatch)
        }
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.weights.contains_key(&p)
    }

    pub fn weight(&self, p: PointId) -> Option<&T> {
        self.weights.get(&p)
    }

    /// Weight, or zero off the cluster.
    pub fn weight_or_zero(&self, p: PointId) -> T {
        self.weights.get(&p).cloned().unwrap_or_else(T::zero)
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.weights.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &T)> + '_ {
        self.weights.iter().map(|(p, w)| (*p, w))
    }

    pub fn weights(&self) -> &BTreeMap<PointId, T> {
        &self.weights
    }

    pub fn carriers(&self) -> &BTreeSet<PointId> {
        &self.carriers
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn require_kind(&self, expected: WeightKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind { expected: expected.name(), found: self.kind.name() })
        }
    }

    fn require_not_value(&self) -> Result<()> {
        if self.kind == WeightKind::Value {
            Err(Error::WrongKind { expected: "virtual or multiplicity", found: "value" })
        } else {
            Ok(())
        }
    }

    /// Same weights under another kind tag.
    pub fn relabel_kind(&self, kind: WeightKind) -> Self {
        WeightedCluster { kind, ..self.clone() }
    }
}

fn structural_diagnostics<T: Scalar>(
    tree: &ArenaTree,
    weights: &BTreeMap<PointId, T>,
    carriers: &BTreeSet<PointId>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (&p, w) in weights {
        if !tree.contains(p) {
            out.push(Diagnostic::UnknownParent { point: p });
            continue;
        }
        let floor_ok = if carriers.contains(&p) { !w.is_negative() } else { w.is_positive() };
        if !floor_ok {
            out.push(Diagnostic::NonPositiveWeight { point: p });
        }
        if let Some(par) = tree.parent(p) {
            if !weights.contains_key(&par) {
                out.push(Diagnostic::NotDownwardClosed { point: p, missing: par });
            }
        }
    }
    out
}

/// Structural problems of a would-be cluster, without building it.
pub fn cluster_diagnostics<T: Scalar>(
    tree: &ArenaTree,
    weights: &BTreeMap<PointId, T>,
    carriers: &BTreeSet<PointId>,
) -> Vec<Diagnostic> {
    structural_diagnostics(tree, weights, carriers)
}

/// `v_p = e_p + sum of v_q over the proximities q of p`.
pub fn values_from_multiplicities<T: Scalar>(
    tree: &ArenaTree,
    mult: &WeightedCluster<T>,
) -> Result<WeightedCluster<T>> {
    mult.check_arena(tree)?;
    mult.require_kind(WeightKind::Multiplicity)?;
    let mut values: BTreeMap<PointId, T> = BTreeMap::new();
    // ids are topologically ordered, so proximities are done first
    for (&p, e) in &mult.weights {
        let mut v = e.clone();
        for q in tree.proximities(p) {
            v = v + values[&q].clone();
        }
        values.insert(p, v);
    }
    Ok(WeightedCluster::from_parts(tree, WeightKind::Value, values))
}

pub fn multiplicities_from_values<T: Scalar>(
    tree: &ArenaTree,
    values: &WeightedCluster<T>,
) -> Result<WeightedCluster<T>> {
    values.check_arena(tree)?;
    values.require_kind(WeightKind::Value)?;
    let mut mult = BTreeMap::new();
    for (&p, v) in &values.weights {
        let mut e = v.clone();
        for q in tree.proximities(p) {
            e = e - values.weights[&q].clone();
        }
        if !e.is_positive() {
            return Err(Error::NonPositiveMultiplicity { point: p });
        }
        mult.insert(p, e);
    }
    Ok(WeightedCluster::from_parts(tree, WeightKind::Multiplicity, mult))
}

/// `rho_p = nu_p - sum of nu_q over cluster points q proximate to p`.
pub fn excess<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>, p: PointId) -> Result<T> {
    k.check_arena(tree)?;
    k.require_not_value()?;
    let w = k.weight(p).ok_or(Error::NotInCluster(p))?;
    Ok(excess_unchecked(tree, k, p, w))
}

fn excess_unchecked<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>, p: PointId, w: &T) -> T {
    let mut r = w.clone();
    for &q in tree.proximate_to(p) {
        if let Some(wq) = k.weight(q) {
            r = r - wq.clone();
        }
    }
    r
}

pub fn excesses<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>) -> Result<BTreeMap<PointId, T>> {
    k.check_arena(tree)?;
    k.require_not_value()?;
    Ok(k.iter().map(|(p, w)| (p, excess_unchecked(tree, k, p, w))).collect())
}

pub fn dicritical_points<T: Scalar>(
    tree: &ArenaTree,
    k: &WeightedCluster<T>,
) -> Result<BTreeSet<PointId>> {
    Ok(excesses(tree, k)?
        .into_iter()
        .filter(|(_, r)| r.is_positive())
        .map(|(p, _)| p)
        .collect())
}

/// First point where the proximity inequality fails.
pub fn first_inconsistency<T: Scalar>(
    tree: &ArenaTree,
    k: &WeightedCluster<T>,
) -> Result<Option<(PointId, T)>> {
    Ok(excesses(tree, k)?.into_iter().find(|(_, r)| r.is_negative()))
}

pub fn is_consistent<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>) -> Result<bool> {
    Ok(first_inconsistency(tree, k)?.is_none())
}

/// Weights of the unibranch chain `K(p)` along the path to `p`.
pub fn chain_weights<T: Scalar>(tree: &ArenaTree, p: PointId) -> Result<Vec<(PointId, T)>> {
    tree.check(p)?;
    let path = tree.ancestors(p);
    let mut acc = vec![T::zero(); path.len()];
    let last = path.len() - 1;
    acc[last] = T::one();
    for i in (1..=last).rev() {
        let w = acc[i].clone();
        // the parent sits just before `path[i]`, the second proximity further up
        if let Some(s) = tree.second_proximity(path[i]) {
            let j = path[..i].iter().rposition(|q| *q == s).expect("proximities lie on the path");
            acc[j] = acc[j].clone() + w.clone();
        }
        acc[i - 1] = acc[i - 1].clone() + w;
    }
    Ok(path.into_iter().zip(acc).collect())
}

/// The multiplicity cluster `K(p)`: weight 1 at `p`, and the proximity
/// equality everywhere before it.
pub fn unibranch_chain<T: Scalar>(tree: &ArenaTree, p: PointId) -> Result<WeightedCluster<T>> {
    let w = chain_weights(tree, p)?;
    Ok(WeightedCluster::from_parts(tree, WeightKind::Multiplicity, w.into_iter().collect()))
}

/// Sum of `nu_p * nu'_p` over the common points.
pub fn noether_pairing<T: Scalar>(a: &WeightedCluster<T>, b: &WeightedCluster<T>) -> Result<T> {
    if a.arena != b.arena {
        return Err(Error::ArenaMismatch);
    }
    a.require_not_value()?;
    b.require_not_value()?;
    let mut s = T::zero();
    for (p, w) in &a.weights {
        if let Some(w2) = b.weights.get(p) {
            s = s + w.clone() * w2.clone();
        }
    }
    Ok(s)
}

pub fn self_intersection<T: Scalar>(k: &WeightedCluster<T>) -> Result<T> {
    noether_pairing(k, k)
}
