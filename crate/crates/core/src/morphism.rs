use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::arena::{ArenaTag, ArenaTree, PointId};
use crate::cluster::{first_inconsistency, WeightKind, WeightedCluster};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The pairs `(n_p, m_p)` attached to points by the polar morphism of the
/// pencil whose base points form a virtual cluster `BP`.
///
/// `n_O = 1`, `m_O = nu_O + 1`; a free point adds `e + 1` to `m` of the
/// point it is proximate to, a satellite sums both proximities and adds `e`,
/// where `e` is the `BP` weight (zero off `BP`). Entries are filled lazily.
#[derive(Clone, Debug)]
pub struct MorphismInvariants<T> {
    arena: ArenaTag,
    bp: BTreeMap<PointId, T>,
    table: BTreeMap<PointId, (T, T)>,
}

impl<T: Scalar> MorphismInvariants<T> {
    pub fn compute(tree: &ArenaTree, bp: &WeightedCluster<T>) -> Result<Self> {
        bp.check_arena(tree)?;
        if bp.kind() != WeightKind::Virtual {
            return Err(Error::WrongKind { expected: "virtual", found: bp.kind().name() });
        }
        match bp.weight(PointId::ORIGIN) {
            Some(w) if w.is_positive() => {}
            _ => return Err(Error::DegenerateOrigin),
        }
        if let Some((point, _)) = first_inconsistency(tree, bp)? {
            return Err(Error::InconsistentCluster { point });
        }
        let mut inv = MorphismInvariants {
            arena: tree.tag(),
            bp: bp.weights().clone(),
            table: BTreeMap::new(),
        };
        for p in bp.points() {
            inv.fill(tree, p);
        }
        Ok(inv)
    }

    fn weight(&self, p: PointId) -> T {
        self.bp.get(&p).cloned().unwrap_or_else(T::zero)
    }

    // parents are filled first because ids are topological
    fn fill(&mut self, tree: &ArenaTree, p: PointId) -> (T, T) {
        if let Some(v) = self.table.get(&p) {
            return v.clone();
        }
        let e = self.weight(p);
        let r = tree.record(p);
        let v = match (r.parent, r.second_proximity) {
            (None, _) => (T::one(), e + T::one()),
            (Some(a), None) => {
                let (n, m) = self.fill(tree, a);
                (n, m + e + T::one())
            }
            (Some(a), Some(b)) => {
                let (na, ma) = self.fill(tree, a);
                let (nb, mb) = self.fill(tree, b);
                (na + nb, ma + mb + e)
            }
        };
        self.table.insert(p, v.clone());
        v
    }

    /// Extends the table to `p` and everything before it.
    pub fn extend_to(&mut self, tree: &ArenaTree, p: PointId) -> Result<(T, T)> {
        if self.arena != tree.tag() {
            return Err(Error::ArenaMismatch);
        }
        tree.check(p)?;
        Ok(self.fill(tree, p))
    }

    pub fn get(&self, p: PointId) -> Option<&(T, T)> {
        self.table.get(&p)
    }

    pub fn n(&self, p: PointId) -> Option<&T> {
        self.table.get(&p).map(|v| &v.0)
    }

    pub fn m(&self, p: PointId) -> Option<&T> {
        self.table.get(&p).map(|v| &v.1)
    }

    pub fn domain(&self) -> impl Iterator<Item = PointId> + '_ {
        self.table.keys().copied()
    }

    pub fn bp_weight(&self, p: PointId) -> T {
        self.weight(p)
    }

    pub fn arena_tag(&self) -> ArenaTag {
        self.arena
    }

    /// `m_p / n_p`, extending the table if needed.
    pub fn height_quotient(&mut self, tree: &ArenaTree, p: PointId) -> Result<Ratio<T>> {
        let (n, m) = self.extend_to(tree, p)?;
        Ok(Ratio::new(m, n))
    }

    /// Same as [`height_quotient`](Self::height_quotient) for points already in the table.
    pub fn quotient(&self, p: PointId) -> Option<Ratio<T>> {
        self.table.get(&p).map(|(n, m)| Ratio::new(m.clone(), n.clone()))
    }

    /// Recomputes the weight at `p` from the jacobian relation; it must
    /// equal the `BP` weight.
    pub fn jacobian_multiplicity_check(&self, tree: &ArenaTree, p: PointId) -> Result<T> {
        if self.arena != tree.tag() {
            return Err(Error::ArenaMismatch);
        }
        tree.check(p)?;
        let get = |q: PointId| self.table.get(&q).cloned().ok_or(Error::UnknownPoint(q));
        let (n, m) = get(p)?;
        let r = tree.record(p);
        let two = T::one() + T::one();
        Ok(match (r.parent, r.second_proximity) {
            (None, _) => m + n - two,
            (Some(a), None) => {
                let (na, ma) = get(a)?;
                m + n - ma - na - T::one()
            }
            (Some(a), Some(b)) => {
                let (na, ma) = get(a)?;
                let (nb, mb) = get(b)?;
                m + n - ma - na - mb - nb
            }
        })
    }
}
