use std::cmp::Ordering;

use num_rational::Ratio;

use crate::arena::{ArenaTree, PointId};
use crate::cluster::{chain_weights, WeightedCluster, WeightKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outcome of comparing two points under the satellite order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl PrecOrdering {
    pub fn reverse(self) -> Self {
        match self {
            PrecOrdering::Less => PrecOrdering::Greater,
            PrecOrdering::Greater => PrecOrdering::Less,
            o => o,
        }
    }
}

pub fn defining_free_point(tree: &ArenaTree, q: PointId) -> Result<PointId> {
    tree.defining_free_point(q)
}

/// `nu_p(K(q)) / nu_O(K(q))`, zero when `p` does not precede `q`.
pub fn fraction_at<T: Scalar>(tree: &ArenaTree, p: PointId, q: PointId) -> Result<Ratio<T>> {
    tree.check(p)?;
    let (at_p, origin) = fraction_parts(tree, p, q)?;
    Ok(Ratio::new(at_p, origin))
}

/// Unreduced `(nu_p(K(q)), nu_O(K(q)))`; the second entry is positive.
fn fraction_parts<T: Scalar>(tree: &ArenaTree, p: PointId, q: PointId) -> Result<(T, T)> {
    let w = chain_weights::<T>(tree, q)?;
    let at_p = w.iter().find(|(x, _)| *x == p).map(|(_, v)| v.clone()).unwrap_or_else(T::zero);
    Ok((at_p, w[0].1.clone()))
}

/// Compares the fractions of `a` and `b` at `p` without reducing them.
fn cmp_fractions<T: Scalar>(tree: &ArenaTree, p: PointId, a: PointId, b: PointId) -> Result<Ordering> {
    let (na, da) = fraction_parts::<T>(tree, p, a)?;
    let (nb, db) = fraction_parts::<T>(tree, p, b)?;
    Ok((na * db).cmp(&(nb * da)))
}

/// Defining free point `p` of `q` and the fraction of `q` measured at `p`.
pub fn satellite_quotient<T: Scalar>(tree: &ArenaTree, q: PointId) -> Result<(PointId, Ratio<T>)> {
    let p = tree.defining_free_point(q)?;
    Ok((p, fraction_at(tree, p, q)?))
}

/// The partial order on points: `q1` precedes `q2` when the defining free
/// point of `q1` precedes that of `q2` and the fraction of `q1` does not
/// exceed the fraction of `q2`, both measured at the defining point of `q1`.
pub fn prec_compare<T: Scalar>(tree: &ArenaTree, q1: PointId, q2: PointId) -> Result<PrecOrdering> {
    let p1 = tree.defining_free_point(q1)?;
    let p2 = tree.defining_free_point(q2)?;
    if q1 == q2 {
        return Ok(PrecOrdering::Equal);
    }
    if p1 == p2 {
        // distinct points under one free point have distinct fractions
        return Ok(match cmp_fractions::<T>(tree, p1, q1, q2)? {
            Ordering::Less => PrecOrdering::Less,
            Ordering::Greater => PrecOrdering::Greater,
            Ordering::Equal => PrecOrdering::Equal,
        });
    }
    if tree.precedes_or_eq(p1, p2) {
        return Ok(if cmp_fractions::<T>(tree, p1, q1, q2)? != Ordering::Greater { PrecOrdering::Less } else { PrecOrdering::Incomparable });
    }
    if tree.precedes_or_eq(p2, p1) {
        return Ok(if cmp_fractions::<T>(tree, p2, q2, q1)? != Ordering::Greater { PrecOrdering::Greater } else { PrecOrdering::Incomparable });
    }
    Ok(PrecOrdering::Incomparable)
}

/// The two proximities of a satellite, smaller first.
fn ordered_proximities<T: Scalar>(tree: &ArenaTree, q: PointId) -> Result<(PointId, PointId)> {
    let a = tree.parent(q).expect("satellites have parents");
    let b = tree.second_proximity(q).expect("satellite");
    let p = tree.defining_free_point(q)?;
    // points before p sit at fraction 0, p itself at 1
    Ok(if cmp_fractions::<T>(tree, p, a, b)? == Ordering::Less { (a, b) } else { (b, a) })
}

fn find_or_create(tree: &mut ArenaTree, parent: PointId, second: PointId) -> PointId {
    if let Some(&c) = tree
        .children(parent)
        .iter()
        .find(|&&c| tree.second_proximity(c) == Some(second))
    {
        return c;
    }
    tree.add_satellite(parent, second).expect("second is a proximity of parent")
}

/// The satellite child of `q` just below it in the order. Created if absent.
pub fn first_satellite<T: Scalar>(tree: &mut ArenaTree, q: PointId) -> Result<PointId> {
    tree.check(q)?;
    if tree.is_origin(q) {
        return Err(Error::OriginHasNoSatellite);
    }
    let target = if tree.is_free(q) {
        tree.parent(q).expect("non-origin")
    } else {
        ordered_proximities::<T>(tree, q)?.0
    };
    Ok(find_or_create(tree, q, target))
}

/// The satellite child of a satellite `q` just above it. Created if absent.
pub fn second_satellite<T: Scalar>(tree: &mut ArenaTree, q: PointId) -> Result<PointId> {
    tree.check(q)?;
    if tree.is_origin(q) {
        return Err(Error::OriginHasNoSatellite);
    }
    if tree.is_free(q) {
        return Err(Error::SecondSatelliteOfFreePoint);
    }
    let target = ordered_proximities::<T>(tree, q)?.1;
    Ok(find_or_create(tree, q, target))
}

/// Existing first satellite, without touching the arena.
pub fn find_first_satellite<T: Scalar>(tree: &ArenaTree, q: PointId) -> Result<Option<PointId>> {
    tree.check(q)?;
    if tree.is_origin(q) {
        return Err(Error::OriginHasNoSatellite);
    }
    let target = if tree.is_free(q) {
        tree.parent(q).expect("non-origin")
    } else {
        ordered_proximities::<T>(tree, q)?.0
    };
    Ok(tree.children(q).iter().copied().find(|&c| tree.second_proximity(c) == Some(target)))
}

/// The unique maximum of a set of mutually comparable points.
pub fn max_under_prec<T: Scalar>(
    tree: &ArenaTree,
    set: impl IntoIterator<Item = PointId>,
) -> Result<PointId> {
    let pts: Vec<PointId> = set.into_iter().collect();
    let mut best = *pts.first().ok_or(Error::EmptySet)?;
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            if prec_compare::<T>(tree, a, b)? == PrecOrdering::Incomparable {
                return Err(Error::NotComparable(a, b));
            }
        }
        if prec_compare::<T>(tree, best, a)? == PrecOrdering::Less {
            best = a;
        }
    }
    Ok(best)
}

/// Whether `q` precedes a branch with the given multiplicity cluster:
/// the defining free point `p` of `q` lies on the branch and
/// `nu_p(K(q)) / nu_O(K(q)) < e_p / e_O`.
pub fn compare_point_to_branch<T: Scalar>(
    tree: &ArenaTree,
    q: PointId,
    branch: &WeightedCluster<T>,
) -> Result<bool> {
    branch.check_arena(tree)?;
    if branch.kind() == WeightKind::Value {
        return Err(Error::WrongKind { expected: "multiplicity", found: "value" });
    }
    for p in branch.points() {
        if tree.children(p).iter().filter(|c| branch.contains(**c)).count() > 1 {
            return Err(Error::NotUnibranch);
        }
    }
    let p = tree.defining_free_point(q)?;
    let Some(ep) = branch.weight(p) else {
        return Ok(false);
    };
    let eo = branch.weight(PointId::ORIGIN).ok_or(Error::NotInCluster(PointId::ORIGIN))?;
    let f: Ratio<T> = fraction_at(tree, p, q)?;
    Ok(f < Ratio::new(ep.clone(), eo.clone()))
}
