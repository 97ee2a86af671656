//! Similarity of weighted clusters: a bijection preserving parents,
//! proximities and weights.
//!
//! The canonical form encodes each point by how it is proximate to what
//! precedes it, its weight and the sorted encodings of its children, so two
//! clusters are similar exactly when their forms agree.

use sha2::{Digest, Sha256};

use crate::arena::{ArenaTree, PointId};
use crate::cluster::WeightedCluster;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FREE: u8 = b'f';
// second proximity is the grandparent
const VIA_GRANDPARENT: u8 = b'g';
// second proximity is inherited from the parent
const VIA_PARENT_SECOND: u8 = b's';

fn role(tree: &ArenaTree, p: PointId) -> u8 {
    let r = tree.record(p);
    match (r.parent, r.second_proximity) {
        (_, None) => FREE,
        (Some(a), Some(s)) if tree.parent(a) == Some(s) => VIA_GRANDPARENT,
        _ => VIA_PARENT_SECOND,
    }
}

fn encode<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>, p: PointId, out: &mut Vec<u8>) {
    out.push(b'(');
    out.push(role(tree, p));
    out.extend_from_slice(k.weight_or_zero(p).to_string().as_bytes());
    let mut kids: Vec<Vec<u8>> = tree
        .children(p)
        .iter()
        .filter(|c| k.contains(**c))
        .map(|&c| {
            let mut v = Vec::new();
            encode(tree, k, c, &mut v);
            v
        })
        .collect();
    kids.sort();
    for kid in kids {
        out.extend(kid);
    }
    out.push(b')');
}

/// Byte encoding invariant under similarity.
pub fn canonical_form<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>) -> Result<Vec<u8>> {
    k.check_arena(tree)?;
    let mut out = Vec::new();
    out.extend_from_slice(k.kind().name().as_bytes());
    out.push(b':');
    if k.contains(PointId::ORIGIN) {
        encode(tree, k, PointId::ORIGIN, &mut out);
    }
    Ok(out)
}

/// Lowercase hex SHA-256 of the canonical form.
pub fn canonical_digest<T: Scalar>(tree: &ArenaTree, k: &WeightedCluster<T>) -> Result<String> {
    Ok(hex::encode(Sha256::digest(canonical_form(tree, k)?)))
}

/// Clusters may live on different arenas.
pub fn are_similar<T: Scalar>(
    t1: &ArenaTree,
    k1: &WeightedCluster<T>,
    t2: &ArenaTree,
    k2: &WeightedCluster<T>,
) -> Result<bool> {
    Ok(canonical_form(t1, k1)? == canonical_form(t2, k2)?)
}

/// Two curves are equisingular when their multiplicity clusters of
/// singular points are similar.
pub fn are_equisingular<T: Scalar>(
    t1: &ArenaTree,
    c1: &crate::oracle::CurveCluster<T>,
    t2: &ArenaTree,
    c2: &crate::oracle::CurveCluster<T>,
) -> Result<bool> {
    let (m1, m2) = (c1.multiplicities(), c2.multiplicities());
    if m1.kind() != m2.kind() {
        return Err(Error::WrongKind { expected: m1.kind().name(), found: m2.kind().name() });
    }
    are_similar(t1, m1, t2, m2)
}
