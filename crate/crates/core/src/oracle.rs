//! Forward computations from a curve's singular points, used to check
//! recovery independently.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{ArenaTree, PointId};
use crate::cluster::{chain_weights, excesses, first_inconsistency, unibranch_chain, WeightKind, WeightedCluster};
use crate::error::{Error, Result};
use crate::ordering::{compare_point_to_branch, max_under_prec, prec_compare, PrecOrdering};
use crate::scalar::Scalar;

/// Multiplicity cluster of the singular points of a reduced singular curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveCluster<T> {
    mult: WeightedCluster<T>,
}

impl<T: Scalar> CurveCluster<T> {
    /// Checks consistency, saturation (every point is multiple, satellite or
    /// precedes a satellite of the cluster) and singularity.
    pub fn new(tree: &ArenaTree, mult: WeightedCluster<T>) -> Result<Self> {
        mult.check_arena(tree)?;
        if mult.kind() != WeightKind::Multiplicity {
            return Err(Error::WrongKind { expected: "multiplicity", found: mult.kind().name() });
        }
        if mult.is_empty() {
            return Err(Error::NotSingular);
        }
        if let Some((point, _)) = first_inconsistency(tree, &mult)? {
            return Err(Error::InconsistentCluster { point });
        }
        let mut before_satellite = BTreeSet::new();
        for p in mult.points().filter(|p| tree.is_satellite(*p)) {
            let path = tree.ancestors(p);
            before_satellite.extend(path[..path.len() - 1].iter().copied());
        }
        for (p, e) in mult.iter() {
            if !(e > &T::one() || tree.is_satellite(p) || before_satellite.contains(&p)) {
                return Err(Error::NotSaturated(p));
            }
        }
        Ok(CurveCluster { mult })
    }

    pub fn multiplicities(&self) -> &WeightedCluster<T> {
        &self.mult
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.mult.contains(p)
    }

    pub fn multiplicity(&self, p: PointId) -> T {
        self.mult.weight_or_zero(p)
    }
}

/// Free points on the curve in the first neighbourhood of `p`: free children
/// inside the cluster plus the branches leaving `p` through non-singular
/// free points, which is the excess of the multiplicity cluster at `p`.
pub fn free_count_first_neighbourhood<T: Scalar>(
    tree: &ArenaTree,
    curve: &CurveCluster<T>,
    p: PointId,
) -> Result<T> {
    let rho = crate::cluster::excess(tree, &curve.mult, p)?;
    let free_children = tree
        .children(p)
        .iter()
        .filter(|&&c| tree.is_free(c) && curve.contains(c))
        .count();
    Ok(rho + T::from_usize_exact(free_children))
}

/// Points with at least two free points of the curve after them, or one for
/// a satellite.
pub fn rupture_points<T: Scalar>(tree: &ArenaTree, curve: &CurveCluster<T>) -> Result<BTreeSet<PointId>> {
    let mut out = BTreeSet::new();
    for p in curve.mult.points() {
        let c = free_count_first_neighbourhood(tree, curve, p)?;
        let need = if tree.is_satellite(p) { T::one() } else { T::one() + T::one() };
        if c >= need {
            out.insert(p);
        }
    }
    Ok(out)
}

/// Whether `p` lies on the curve. The cluster omits non-singular points, so
/// a free point past a point where branches leave may go either way
/// (`None`).
pub fn lies_on_curve<T: Scalar>(tree: &ArenaTree, curve: &CurveCluster<T>, p: PointId) -> Result<Option<bool>> {
    tree.check(p)?;
    if curve.contains(p) {
        return Ok(Some(true));
    }
    let path = tree.ancestors(p);
    let first_off = path.iter().position(|q| !curve.contains(*q)).expect("p is off the curve");
    if path[first_off..].iter().any(|q| tree.is_satellite(*q)) {
        return Ok(Some(false));
    }
    let par = path[first_off - 1];
    if crate::cluster::excess(tree, &curve.mult, par)?.is_positive() {
        Ok(None)
    } else {
        Ok(Some(false))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantQuotient<T: Scalar> {
    pub value: Ratio<T>,
    /// Some point of `K(p)` may lie on the curve without being recorded
    /// in the cluster, so `value` is a lower bound only.
    pub partial: bool,
}

/// `I(p) = [curve . K(p)] / nu_O(K(p))`.
pub fn invariant_quotient<T: Scalar>(
    tree: &ArenaTree,
    curve: &CurveCluster<T>,
    p: PointId,
) -> Result<InvariantQuotient<T>> {
    curve.mult.check_arena(tree)?;
    let w = chain_weights::<T>(tree, p)?;
    let mut s = T::zero();
    for (q, nu) in &w {
        if let Some(e) = curve.mult.weight(*q) {
            s = s + e.clone() * nu.clone();
        }
    }
    let partial = match w.iter().find(|(q, _)| !curve.contains(*q)) {
        None => false,
        Some((q, _)) => lies_on_curve(tree, curve, *q)?.is_none(),
    };
    Ok(InvariantQuotient { value: Ratio::new(s, w[0].1.clone()), partial })
}

/// `I(p)` at every rupture point.
pub fn polar_invariant_table<T: Scalar>(
    tree: &ArenaTree,
    curve: &CurveCluster<T>,
) -> Result<BTreeMap<PointId, Ratio<T>>> {
    let mut out = BTreeMap::new();
    for r in rupture_points(tree, curve)? {
        out.insert(r, invariant_quotient(tree, curve, r)?.value);
    }
    Ok(out)
}

pub fn polar_invariants<T: Scalar>(tree: &ArenaTree, curve: &CurveCluster<T>) -> Result<BTreeSet<Ratio<T>>> {
    Ok(polar_invariant_table(tree, curve)?.into_values().collect())
}

/// Polar invariants at `p` and the rupture points satellite of `p`.
pub fn polar_invariants_local<T: Scalar>(
    tree: &ArenaTree,
    curve: &CurveCluster<T>,
    p: PointId,
) -> Result<BTreeMap<PointId, Ratio<T>>> {
    tree.check(p)?;
    Ok(polar_invariant_table(tree, curve)?
        .into_iter()
        .filter(|(r, _)| *r == p || tree.is_satellite_of(*r, p))
        .collect())
}

/// The curve's branches, as multiplicity clusters. A branch leaving the
/// cluster at `x` through a non-singular free point has cluster `K(x)`;
/// the excess at `x` counts such branches.
pub fn branches<T: Scalar>(tree: &ArenaTree, curve: &CurveCluster<T>) -> Result<Vec<WeightedCluster<T>>> {
    let mut out = Vec::new();
    for (x, rho) in excesses(tree, &curve.mult)? {
        let k = unibranch_chain::<T>(tree, x)?;
        let mut r = rho;
        while r.is_positive() {
            out.push(k.clone());
            r = r - T::one();
        }
    }
    Ok(out)
}

/// `p` free, `q1` a satellite of `p`, `q2` equal to `p` or a satellite of
/// `p` above `q1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthSample {
    pub p: PointId,
    pub q1: PointId,
    pub q2: PointId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthViolation {
    /// The sample does not have the required shape.
    Malformed(GrowthSample),
    /// Whether `p` lies on the curve cannot be told from the cluster.
    Ambiguous(GrowthSample),
    /// `I(p') <= I(q1)` fails, or equality does not match `p` being off the curve.
    Start(GrowthSample),
    /// `I(q1) <= I(q2)` fails, or equality does not match the absence of a
    /// branch above `q1`.
    Step(GrowthSample),
}

/// Checks that the invariant grows along satellite chains: `I(p') <= I(q1)`
/// with equality iff `p` is off the curve, and `I(q1) <= I(q2)` with
/// equality iff no branch lies above `q1`.
pub fn check_growth<T: Scalar>(
    tree: &ArenaTree,
    curve: &CurveCluster<T>,
    samples: &[GrowthSample],
) -> Result<Vec<GrowthViolation>> {
    let branch_list = branches(tree, curve)?;
    let mut out = Vec::new();
    for &s in samples {
        let shape_ok = tree.contains(s.p)
            && tree.contains(s.q1)
            && tree.contains(s.q2)
            && tree.is_free(s.p)
            && !tree.is_origin(s.p)
            && tree.is_satellite_of(s.q1, s.p)
            && (s.q2 == s.p || tree.is_satellite_of(s.q2, s.p))
            && prec_compare::<T>(tree, s.q1, s.q2)? == PrecOrdering::Less;
        if !shape_ok {
            out.push(GrowthViolation::Malformed(s));
            continue;
        }
        let pp = tree.parent(s.p).expect("not the origin");
        let Some(on_curve) = lies_on_curve(tree, curve, s.p)? else {
            out.push(GrowthViolation::Ambiguous(s));
            continue;
        };
        let i_pp = invariant_quotient(tree, curve, pp)?.value;
        let i_1 = invariant_quotient(tree, curve, s.q1)?.value;
        let i_2 = invariant_quotient(tree, curve, s.q2)?.value;
        if i_pp > i_1 || (i_pp == i_1) == on_curve {
            out.push(GrowthViolation::Start(s));
        }
        let mut above = false;
        for b in &branch_list {
            if compare_point_to_branch(tree, s.q1, b)? {
                above = true;
                break;
            }
        }
        if i_1 > i_2 || (i_1 == i_2) == above {
            out.push(GrowthViolation::Step(s));
        }
    }
    Ok(out)
}

/// The largest rupture point among `p` and its satellites, if any.
pub fn top_rupture_point<T: Scalar>(
    tree: &ArenaTree,
    rupture: &BTreeSet<PointId>,
    p: PointId,
) -> Result<Option<PointId>> {
    let fam: Vec<_> = rupture.iter().copied().filter(|&r| r == p || tree.is_satellite_of(r, p)).collect();
    if fam.is_empty() {
        return Ok(None);
    }
    max_under_prec::<T>(tree, fam).map(Some)
}

/// A random singular curve on a fresh arena, reproducible from `seed`.
///
/// The arena grows by random free and satellite points; a few endpoints
/// are picked as branch ends and the curve is the sum of their chains,
/// trimmed of trailing non-singular points. Draws that overshoot
/// `max_multiplicity` at the origin or come out smooth are retried with
/// progressively smaller parameters. A `max_multiplicity` below 2 is
/// treated as 2, the least a singular curve needs.
pub fn random_curve<T: Scalar>(
    seed: u64,
    max_points: usize,
    max_multiplicity: u64,
) -> (ArenaTree, CurveCluster<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut size = max_points.max(1);
    let max_multiplicity = max_multiplicity.max(2);
    loop {
        for _ in 0..8 {
            if let Some(c) = draw_curve(&mut rng, size, max_multiplicity) {
                return c;
            }
        }
        if size > 1 {
            size -= 1;
        }
    }
}

fn draw_curve<T: Scalar>(
    rng: &mut ChaCha8Rng,
    size: usize,
    max_multiplicity: u64,
) -> Option<(ArenaTree, CurveCluster<T>)> {
    let mut tree = ArenaTree::with_origin();
    let n = rng.gen_range(1..=size);
    while tree.len() < n {
        let parent = PointId::from_index(rng.gen_range(0..tree.len()));
        let prox = tree.proximities(parent);
        if !prox.is_empty() && rng.gen_bool(0.55) {
            let s = prox[rng.gen_range(0..prox.len())];
            if tree.add_satellite(parent, s).is_err() {
                // that satellite exists already
                continue;
            }
        } else {
            tree.add_free(parent).ok()?;
        }
    }
    let ends = rng.gen_range(1..=3);
    let mut weights: BTreeMap<PointId, T> = BTreeMap::new();
    for _ in 0..ends {
        let x = PointId::from_index(rng.gen_range(0..tree.len()));
        let copies = rng.gen_range(1..=2usize);
        for (q, nu) in chain_weights::<T>(&tree, x).ok()? {
            let add = nu * T::from_usize_exact(copies);
            let e = weights.entry(q).or_insert_with(T::zero);
            *e = e.clone() + add;
        }
    }
    let limit = T::from_u64(max_multiplicity)?;
    if weights[&PointId::ORIGIN] > limit {
        return None;
    }
    trim_smooth_tails(&tree, &mut weights);
    if weights.is_empty() {
        return None;
    }
    let mult = WeightedCluster::new(&tree, WeightKind::Multiplicity, weights).ok()?;
    let curve = CurveCluster::new(&tree, mult).ok()?;
    Some((tree, curve))
}

// drops free leaves of multiplicity one that precede no satellite
fn trim_smooth_tails<T: Scalar>(tree: &ArenaTree, weights: &mut BTreeMap<PointId, T>) {
    loop {
        let leaf = weights.iter().rev().find(|(p, e)| {
            tree.is_free(**p)
                && e.is_one()
                && !tree.children(**p).iter().any(|c| weights.contains_key(c))
        });
        match leaf.map(|(p, _)| *p) {
            Some(p) => {
                weights.remove(&p);
            }
            None => return,
        }
    }
}
