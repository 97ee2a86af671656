use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

use crate::arena::{ArenaTree, PointId};
use crate::cluster::{
    dicritical_points, excess, first_inconsistency, multiplicities_from_values, noether_pairing,
    unibranch_chain, WeightKind, WeightedCluster,
};
use crate::error::{Error, Result};
use crate::morphism::MorphismInvariants;
use crate::oracle::{rupture_points, CurveCluster};
use crate::ordering::{first_satellite, max_under_prec, prec_compare, second_satellite, PrecOrdering};
use crate::scalar::{fmt_ratio, Scalar};

/// One row of the dicritical-to-rupture table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Association<T: Scalar> {
    pub dicritical: PointId,
    pub invariant: Ratio<T>,
    /// `(p', p)`; absent for a dicritical origin.
    pub base: Option<(PointId, PointId)>,
    pub rupture: PointId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkDecision {
    First,
    Second,
    Stop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkStep<T> {
    pub point: PointId,
    pub n: T,
    pub m: T,
    pub decision: WalkDecision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryResult<T: Scalar> {
    pub rupture_points: BTreeSet<PointId>,
    pub singular_points: BTreeSet<PointId>,
    pub values: WeightedCluster<T>,
    pub multiplicities: WeightedCluster<T>,
    /// Sorted by dicritical point.
    pub associations: Vec<Association<T>>,
    /// Satellites added to the arena by the walks.
    pub created: BTreeSet<PointId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Algorithm {
    #[default]
    Basic,
    Grouped,
}

/// A result together with what happened along the way.
#[derive(Clone, Debug)]
pub struct RecoveryReport<T: Scalar> {
    pub result: RecoveryResult<T>,
    pub walks: Vec<(PointId, Vec<WalkStep<T>>)>,
    pub warnings: Vec<String>,
}

/// An error plus the associations completed before it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryFailure<T: Scalar> {
    pub error: Error,
    pub partial: Vec<Association<T>>,
}

impl<T: Scalar> fmt::Display for RecoveryFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)?;
        for a in &self.partial {
            write!(f, "; {} -> {} (I = {})", a.dicritical, a.rupture, fmt_ratio(&a.invariant))?;
        }
        Ok(())
    }
}

impl<T: Scalar> std::error::Error for RecoveryFailure<T> {}

/// `I_d = [BP . K(d)] / n_d + 1`.
pub fn dicritical_invariant<T: Scalar>(
    tree: &ArenaTree,
    bp: &WeightedCluster<T>,
    inv: &mut MorphismInvariants<T>,
    d: PointId,
) -> Result<Ratio<T>> {
    if !excess(tree, bp, d)?.is_positive() {
        return Err(Error::NotDicritical(d));
    }
    let k = unibranch_chain(tree, d)?;
    let pairing = noether_pairing(bp, &k)?;
    let (n, _) = inv.extend_to(tree, d)?;
    Ok(Ratio::new(pairing, n) + Ratio::from_integer(T::one()))
}

/// Last consecutive pair `(p', p)` on the path to `d` with `p` free and
/// `m_{p'} / n_{p'} < I`.
pub fn base_free_point<T: Scalar>(
    tree: &ArenaTree,
    inv: &mut MorphismInvariants<T>,
    d: PointId,
    target: &Ratio<T>,
) -> Result<(PointId, PointId)> {
    let path = tree.ancestors(d);
    let mut found = None;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if tree.is_free(b) && cmp_quotient(inv.extend_to(tree, a)?, target) == Ordering::Less {
            found = Some((a, b));
        }
    }
    found.ok_or(Error::NoQualifyingPair(d))
}

/// Compares `m/n` with `target`; `n` is positive.
fn cmp_quotient<T: Scalar>((n, m): (T, T), target: &Ratio<T>) -> Ordering {
    (m * target.denom().clone()).cmp(&(target.numer().clone() * n))
}

/// Mediant search among the satellites of the free point `p` for the point
/// whose quotient `m/n` equals `target`. Missing satellites are created.
pub fn satellite_walk<T: Scalar>(
    tree: &mut ArenaTree,
    inv: &mut MorphismInvariants<T>,
    p: PointId,
    target: &Ratio<T>,
    mut trace: Option<&mut Vec<WalkStep<T>>>,
) -> Result<PointId> {
    let cap = target.numer().abs() + target.denom().abs();
    let mut q = p;
    let mut steps = T::zero();
    loop {
        let (n, m) = inv.extend_to(tree, q)?;
        let decision = match cmp_quotient((n.clone(), m.clone()), target) {
            Ordering::Equal => WalkDecision::Stop,
            Ordering::Greater => WalkDecision::First,
            Ordering::Less => WalkDecision::Second,
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(WalkStep { point: q, n, m, decision });
        }
        if decision == WalkDecision::Stop {
            return Ok(q);
        }
        if steps >= cap {
            break;
        }
        steps = steps + T::one();
        q = match decision {
            WalkDecision::First => first_satellite::<T>(tree, q)?,
            _ => match second_satellite::<T>(tree, q) {
                Ok(s) => s,
                Err(Error::SecondSatelliteOfFreePoint) => break,
                Err(e) => return Err(e),
            },
        };
    }
    Err(Error::WalkDiverged { start: p, target: fmt_ratio(target) })
}

/// Members of `set` that are `p` or satellites of `p`.
fn in_satellite_family(tree: &ArenaTree, set: &BTreeSet<PointId>, p: PointId) -> Vec<PointId> {
    set.iter().copied().filter(|&x| x == p || tree.is_satellite_of(x, p)).collect()
}

/// Values of the singular points from the rupture set and the invariants.
pub fn recover_values<T: Scalar>(
    tree: &ArenaTree,
    inv: &mut MorphismInvariants<T>,
    rupture: &BTreeSet<PointId>,
    singular: &BTreeSet<PointId>,
) -> Result<WeightedCluster<T>> {
    let mut v: BTreeMap<PointId, T> = BTreeMap::new();
    for &p in singular {
        inv.extend_to(tree, p)?;
    }
    let nm = |inv: &MorphismInvariants<T>, p: PointId| inv.get(p).cloned().expect("extended");
    for &p in rupture {
        v.insert(p, nm(inv, p).1);
    }
    // biggest rupture point among each free point and its satellites
    let mut tops: BTreeMap<PointId, PointId> = BTreeMap::new();
    let top = |tops: &mut BTreeMap<PointId, PointId>, p: PointId| -> Result<PointId> {
        if let Some(q) = tops.get(&p) {
            return Ok(*q);
        }
        let family = in_satellite_family(tree, rupture, p);
        if family.is_empty() {
            return Err(Error::EmptyRuptureSet(p));
        }
        let q = max_under_prec::<T>(tree, family)?;
        tops.insert(p, q);
        Ok(q)
    };
    let rest: Vec<PointId> = singular.iter().copied().filter(|p| !rupture.contains(p)).collect();
    for &p in rest.iter().filter(|&&p| tree.is_free(p)) {
        let (n, m) = nm(inv, p);
        let has_free_child = tree.children(p).iter().any(|&c| tree.is_free(c) && singular.contains(&c));
        if has_free_child {
            v.insert(p, m);
            continue;
        }
        let q = top(&mut tops, p)?;
        let (nq, mq) = nm(inv, q);
        // the only integer in [x, x + 1)
        v.insert(p, (n * mq).div_ceil(&nq));
    }
    for &p in rest.iter().filter(|&&p| tree.is_satellite(p)) {
        let (n, m) = nm(inv, p);
        let pf = tree.defining_free_point(p)?;
        let q = top(&mut tops, pf)?;
        let (nq, mq) = nm(inv, q);
        let (nf, _) = nm(inv, pf);
        let vf = v.get(&pf).cloned().ok_or(Error::NotInCluster(pf))?;
        let above = prec_compare::<T>(tree, p, q)? == PrecOrdering::Greater;
        if above && vf.clone() * nq == nf.clone() * mq {
            let num = n * vf;
            if !num.is_multiple_of(&nf) {
                return Err(Error::NonIntegralValue(p));
            }
            v.insert(p, num / nf);
        } else {
            v.insert(p, m);
        }
    }
    WeightedCluster::new(tree, WeightKind::Value, v)
}

/// A dicritical point with its invariant.
type Dicritical<T> = (PointId, Ratio<T>);

struct Run<'a, T: Scalar> {
    tree: &'a mut ArenaTree,
    bp: &'a WeightedCluster<T>,
    inv: MorphismInvariants<T>,
    assoc: Vec<Association<T>>,
    walks: Vec<(PointId, Vec<WalkStep<T>>)>,
    warnings: Vec<String>,
    trace: bool,
}

impl<'a, T: Scalar> Run<'a, T> {
    fn walk(&mut self, d: PointId, p: PointId, target: &Ratio<T>) -> Result<PointId> {
        let mut steps = Vec::new();
        let res = satellite_walk(
            self.tree,
            &mut self.inv,
            p,
            target,
            if self.trace { Some(&mut steps) } else { None },
        );
        if self.trace {
            self.walks.push((d, steps));
        }
        res
    }

    /// Dicriticals other than the origin, by decreasing invariant.
    fn ordered_dicriticals(&mut self) -> Result<(bool, Vec<Dicritical<T>>)> {
        let d = dicritical_points(self.tree, self.bp)?;
        let origin = d.contains(&PointId::ORIGIN);
        let mut list = Vec::new();
        for x in d.into_iter().filter(|x| *x != PointId::ORIGIN) {
            let i = dicritical_invariant(self.tree, self.bp, &mut self.inv, x)?;
            list.push((x, i));
        }
        list.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok((origin, list))
    }

    fn topology(&mut self, grouped: bool) -> Result<()> {
        let (origin, list) = self.ordered_dicriticals()?;
        if origin {
            let i = self.inv.height_quotient(self.tree, PointId::ORIGIN)?;
            self.assoc.push(Association {
                dicritical: PointId::ORIGIN,
                invariant: i,
                base: None,
                rupture: PointId::ORIGIN,
            });
        }
        let mut seen: BTreeMap<PointId, Vec<(Ratio<T>, PointId)>> = BTreeMap::new();
        for (d, i) in list {
            let (pp, p) = base_free_point(self.tree, &mut self.inv, d, &i)?;
            let q = if grouped {
                self.grouped_step(&seen, d, p, &i)?
            } else {
                self.walk(d, p, &i)?
            };
            seen.entry(p).or_default().push((i.clone(), q));
            self.assoc.push(Association { dicritical: d, invariant: i, base: Some((pp, p)), rupture: q });
        }
        Ok(())
    }

    fn grouped_step(
        &mut self,
        seen: &BTreeMap<PointId, Vec<(Ratio<T>, PointId)>>,
        d: PointId,
        p: PointId,
        i: &Ratio<T>,
    ) -> Result<PointId> {
        let Some(prev) = seen.get(&p) else {
            return self.walk(d, p, i);
        };
        if let Some((_, q)) = prev.iter().find(|(j, _)| j == i) {
            return Ok(*q);
        }
        if prev.iter().any(|(j, _)| j > i) {
            let last = self
                .tree
                .ancestors(d)
                .into_iter()
                .rev()
                .find(|&x| self.tree.is_satellite_of(x, p));
            if let Some(q) = last {
                if self.inv.height_quotient(self.tree, q)? == *i {
                    return Ok(q);
                }
                self.warnings.push(format!(
                    "shortcut for dicritical {d} failed at {q}; falling back to the walk"
                ));
            } else {
                self.warnings.push(format!(
                    "no satellite of {p} before dicritical {d}; falling back to the walk"
                ));
            }
        }
        self.walk(d, p, i)
    }

    fn finish(&mut self, arena_len: usize) -> Result<RecoveryResult<T>> {
        let rupture: BTreeSet<PointId> = self.assoc.iter().map(|a| a.rupture).collect();
        let mut singular = BTreeSet::new();
        for &r in &rupture {
            singular.extend(self.tree.ancestors(r));
        }
        let values = recover_values(self.tree, &mut self.inv, &rupture, &singular)?;
        let multiplicities = multiplicities_from_values(self.tree, &values)?;
        if let Some((point, _)) = first_inconsistency(self.tree, &multiplicities)? {
            return Err(Error::InconsistentResult { point });
        }
        // the recovered curve must have exactly the rupture points found
        let curve = CurveCluster::new(self.tree, multiplicities.clone())?;
        let check = rupture_points(self.tree, &curve)?;
        if let Some(&point) = rupture.symmetric_difference(&check).next() {
            return Err(Error::RuptureMismatch { point, expected: rupture.contains(&point) });
        }
        for a in &self.assoc {
            let found = self.inv.height_quotient(self.tree, a.rupture)?;
            if found != a.invariant {
                return Err(Error::QuotientMismatch {
                    point: a.rupture,
                    expected: fmt_ratio(&a.invariant),
                    found: fmt_ratio(&found),
                });
            }
        }
        let mut associations = self.assoc.clone();
        associations.sort_by_key(|a| a.dicritical);
        Ok(RecoveryResult {
            rupture_points: rupture,
            singular_points: singular,
            values,
            multiplicities,
            associations,
            created: (arena_len..self.tree.len()).map(PointId::from_index).collect(),
        })
    }
}

/// Recovers the singular points of a curve, with values and multiplicities,
/// from the virtual cluster of base points of its generic polar.
///
/// May append satellite points to `tree`.
pub fn recover_with<T: Scalar>(
    tree: &mut ArenaTree,
    bp: &WeightedCluster<T>,
    algorithm: Algorithm,
    trace: bool,
) -> std::result::Result<RecoveryReport<T>, RecoveryFailure<T>> {
    let fail = |error| RecoveryFailure { error, partial: Vec::new() };
    bp.check_arena(tree).map_err(fail)?;
    let inv = MorphismInvariants::compute(tree, bp).map_err(fail)?;
    let start = tree.len();
    let mut run = Run {
        tree,
        bp,
        inv,
        assoc: Vec::new(),
        walks: Vec::new(),
        warnings: Vec::new(),
        trace,
    };
    let outcome = run
        .topology(algorithm == Algorithm::Grouped)
        .and_then(|_| run.finish(start));
    match outcome {
        Ok(result) => Ok(RecoveryReport { result, walks: run.walks, warnings: run.warnings }),
        Err(error) => Err(RecoveryFailure { error, partial: run.assoc }),
    }
}

pub fn recover<T: Scalar>(
    tree: &mut ArenaTree,
    bp: &WeightedCluster<T>,
) -> std::result::Result<RecoveryResult<T>, RecoveryFailure<T>> {
    recover_with(tree, bp, Algorithm::Basic, false).map(|r| r.result)
}

/// Same result as [`recover`], skipping walks whose outcome is already known
/// from a dicritical with the same base free point and a larger invariant.
pub fn recover_grouped<T: Scalar>(
    tree: &mut ArenaTree,
    bp: &WeightedCluster<T>,
) -> std::result::Result<RecoveryResult<T>, RecoveryFailure<T>> {
    recover_with(tree, bp, Algorithm::Grouped, false).map(|r| r.result)
}

/// For each free singular point, whether some branch goes through it and is
/// non-singular right after it.
pub fn classify_free_points<T: Scalar>(
    tree: &ArenaTree,
    result: &RecoveryResult<T>,
    inv: &mut MorphismInvariants<T>,
) -> Result<BTreeMap<PointId, bool>> {
    let mut out = BTreeMap::new();
    for &p in result.singular_points.iter().filter(|&&p| tree.is_free(p)) {
        if result.rupture_points.contains(&p) {
            out.insert(p, true);
            continue;
        }
        let family = in_satellite_family(tree, &result.rupture_points, p);
        let flag = if family.is_empty() {
            false
        } else {
            let q = max_under_prec::<T>(tree, family)?;
            let (nq, mq) = inv.extend_to(tree, q)?;
            let (np, _) = inv.extend_to(tree, p)?;
            let vp = result.values.weight(p).cloned().ok_or(Error::NotInCluster(p))?;
            vp * nq != np * mq
        };
        out.insert(p, flag);
    }
    Ok(out)
}
