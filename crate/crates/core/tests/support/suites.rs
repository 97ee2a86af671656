//! Property suites. Each runs a fixed number of deterministic cases and
//! returns the first counterexample as an error message.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use enriques::cluster::{
    chain_weights, dicritical_points, excess, is_consistent, multiplicities_from_values, noether_pairing,
    unibranch_chain, values_from_multiplicities,
};
use enriques::morphism::MorphismInvariants;
use enriques::oracle::{
    check_growth, invariant_quotient, polar_invariants_local, random_curve, rupture_points, top_rupture_point,
    CurveCluster, GrowthSample, GrowthViolation,
};
use enriques::ordering::{first_satellite, fraction_at, prec_compare, second_satellite, PrecOrdering};
use enriques::recovery::{recover, recover_grouped, RecoveryFailure, RecoveryResult};
use enriques::similarity::{are_similar, canonical_form};
use enriques::{ArenaTree, BigInt, PointId, WeightKind, WeightedCluster};

use super::*;

pub type Suite = fn(u32) -> Result<String, String>;

/// The property suites, in reporting order.
pub const SUITES: &[(&str, Suite)] = &[
    ("value/multiplicity round trip", value_round_trip),
    ("noether pairing symmetry and bilinearity", pairing_laws),
    ("unibranch chains against elimination", chain_laws),
    ("morphism invariants", morphism_laws),
    ("satellite ordering, exhaustive to depth 6", satellite_ordering),
    ("growth along satellite chains", growth),
    ("refined bound and distinct local invariants", refined_bound),
    ("similarity invariance of recovery", recovery_invariance),
    ("random curve generator", random_curves),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 512, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())?;
    Ok(format!("{cases} cases"))
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| fail(format!("{e:?}")))
}

// ==== clusters

pub fn value_round_trip(cases: u32) -> Result<String, String> {
    run(cases, tree_and_cluster(WeightKind::Multiplicity, 14), |(t, mult)| {
        let v = ok(values_from_multiplicities(&t, &mult))?;
        for (p, w) in v.iter() {
            prop_assert_eq!(w, &value_by_pairing(&t, &mult, p));
        }
        let back = ok(multiplicities_from_values(&t, &v))?;
        prop_assert_eq!(&back, &mult);
        prop_assert_eq!(ok(values_from_multiplicities(&t, &back))?, v);
        Ok(())
    })
}

fn add_maps(a: &WeightedCluster<BigInt>, b: &WeightedCluster<BigInt>) -> BTreeMap<PointId, BigInt> {
    let mut out = a.weights().clone();
    for (p, w) in b.iter() {
        *out.entry(p).or_insert_with(BigInt::zero) += w;
    }
    out
}

/// Random positive weights on the union of the paths to a few points.
fn closed_cluster(t: &ArenaTree, ends: &[usize], weights: &[u64]) -> WeightedCluster<BigInt> {
    let mut pts = BTreeSet::new();
    for e in ends {
        pts.extend(t.ancestors(PointId::from_index(e % t.len())));
    }
    let w = pts.into_iter().enumerate().map(|(i, p)| (p, BigInt::from(weights[i % weights.len()])));
    WeightedCluster::new(t, WeightKind::Virtual, w).unwrap()
}

pub fn pairing_laws(cases: u32) -> Result<String, String> {
    let ends = || prop::collection::vec(any::<usize>(), 1..4);
    let weights = || prop::collection::vec(1u64..1_000_000_000_000, 1..8);
    let strategy = (steps_strategy(12), ends(), ends(), ends(), weights(), weights(), weights(), 2u64..50, 0usize..6);
    run(cases, strategy, |(steps, ea, eb, ec, wa, wb, wc, k, depth)| {
        let mut t = build_tree(&steps);
        let a = closed_cluster(&t, &ea, &wa);
        let b = closed_cluster(&t, &eb, &wb);
        let c = closed_cluster(&t, &ec, &wc);
        let ab = ok(noether_pairing(&a, &b))?;
        prop_assert_eq!(&ab, &ok(noether_pairing(&b, &a))?);
        let sum = WeightedCluster::new(&t, WeightKind::Virtual, add_maps(&a, &b)).unwrap();
        prop_assert_eq!(
            ok(noether_pairing(&sum, &c))?,
            ok(noether_pairing(&a, &c))? + ok(noether_pairing(&b, &c))?
        );
        let scaled =
            WeightedCluster::new(&t, WeightKind::Virtual, a.iter().map(|(p, w)| (p, w * BigInt::from(k)))).unwrap();
        prop_assert_eq!(ok(noether_pairing(&scaled, &b))?, ab * BigInt::from(k));
        // a fresh branch meets the rest at the origin only
        let mut x = t.add_free(PointId::ORIGIN).unwrap();
        for i in 0..depth {
            let prox = t.proximities(x);
            x = if i % 2 == 0 { t.add_satellite(x, prox[prox.len() - 1]).unwrap() } else { t.add_free(x).unwrap() };
        }
        let a = WeightedCluster::new(&t, WeightKind::Virtual, a.weights().clone()).unwrap();
        let fresh: WeightedCluster<BigInt> = ok(unibranch_chain(&t, x))?;
        let fresh = fresh.relabel_kind(WeightKind::Virtual);
        prop_assert_eq!(
            ok(noether_pairing(&a, &fresh))?,
            a.weight_or_zero(PointId::ORIGIN) * fresh.weight_or_zero(PointId::ORIGIN)
        );
        Ok(())
    })
}

pub fn chain_laws(cases: u32) -> Result<String, String> {
    run(cases, steps_strategy(12), |steps| {
        let t = build_tree(&steps);
        let bp = WeightedCluster::new(&t, WeightKind::Virtual, [(PointId::ORIGIN, BigInt::one())]).unwrap();
        let mut inv = ok(MorphismInvariants::compute(&t, &bp))?;
        for p in t.ids() {
            let k: WeightedCluster<BigInt> = ok(unibranch_chain(&t, p))?;
            let brute = chain_by_elimination(&t, p);
            prop_assert_eq!(k.len(), brute.len());
            for (q, nu) in k.iter() {
                prop_assert_eq!(Ratio::from_integer(nu.clone()), brute[&q].clone());
                let rho = ok(excess(&t, &k, q))?;
                prop_assert_eq!(rho, if q == p { BigInt::one() } else { BigInt::zero() });
            }
            prop_assert!(ok(is_consistent(&t, &k))?);
            if t.ancestors(p).iter().all(|q| !t.is_satellite(*q)) {
                prop_assert!(k.iter().all(|(_, w)| w.is_one()));
            }
            let (n, _) = ok(inv.extend_to(&t, p))?;
            prop_assert_eq!(&n, k.weight(PointId::ORIGIN).unwrap());
        }
        Ok(())
    })
}

// ==== morphism invariants

pub fn morphism_laws(cases: u32) -> Result<String, String> {
    let strategy = (tree_and_cluster(WeightKind::Virtual, 12), any::<u64>());
    run(cases, strategy, |((t, bp), seed)| {
        let mut inv = ok(MorphismInvariants::compute(&t, &bp))?;
        for p in t.ids() {
            let got = ok(inv.extend_to(&t, p))?;
            prop_assert_eq!(&got, &morphism_by_pairing(&t, &bp, p), "at {}", p);
            if let Some(a) = t.parent(p) {
                prop_assert!(inv.m(a).unwrap() < &got.1);
            }
        }
        for p in t.ids() {
            prop_assert_eq!(ok(inv.jacobian_multiplicity_check(&t, p))?, bp.weight_or_zero(p));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t2, ks, map) = shuffle_arena(&t, &[&bp], &mut rng);
        let mut inv2 = ok(MorphismInvariants::compute(&t2, &ks[0]))?;
        for p in t.ids() {
            prop_assert_eq!(inv.get(p).cloned(), Some(ok(inv2.extend_to(&t2, map[&p]))?));
        }
        Ok(())
    })
}

// ==== ordering

fn cmp(t: &ArenaTree, a: PointId, b: PointId) -> PrecOrdering {
    prec_compare::<BigInt>(t, a, b).unwrap()
}

/// All satellites of the free point `p` up to `depth` steps away.
fn grow_satellites(t: &mut ArenaTree, p: PointId, depth: usize) -> Vec<PointId> {
    let mut level = vec![first_satellite::<BigInt>(t, p).unwrap()];
    let mut all = level.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for &q in &level {
            next.push(first_satellite::<BigInt>(t, q).unwrap());
            next.push(second_satellite::<BigInt>(t, q).unwrap());
        }
        all.extend(next.iter().copied());
        level = next;
    }
    all
}

fn brute_fraction(t: &ArenaTree, p: PointId, q: PointId) -> Q {
    let k = chain_by_elimination(t, q);
    k.get(&p).cloned().unwrap_or_else(Q::zero) / k[&PointId::ORIGIN].clone()
}

pub fn satellite_ordering(_cases: u32) -> Result<String, String> {
    let mut checked = 0usize;
    // three places for the free point p: right after the origin, after a
    // free point, after a satellite
    for context in 0..3 {
        let mut t = ArenaTree::with_origin();
        let mut pp = PointId::ORIGIN;
        if context >= 1 {
            pp = t.add_free(pp).unwrap();
        }
        if context == 2 {
            pp = t.add_satellite(pp, PointId::ORIGIN).unwrap();
        }
        let p = t.add_free(pp).unwrap();
        let sats = grow_satellites(&mut t, p, 6);
        let len = t.len();
        let again = grow_satellites(&mut t, p, 6);
        if again != sats || t.len() != len {
            return Err("find-or-create added points on a second pass".into());
        }
        let mut family = vec![p];
        family.extend(sats.iter().copied());

        let q1 = sats[0];
        if !t.is_origin(pp) && cmp(&t, pp, q1) != PrecOrdering::Less {
            return Err(format!("context {context}: p' not below the first satellite of p"));
        }
        if cmp(&t, q1, p) != PrecOrdering::Less {
            return Err(format!("context {context}: first satellite of p not below p"));
        }

        let mut fractions = BTreeSet::new();
        for &q in &family {
            let f: Q = fraction_at(&t, p, q).unwrap();
            if f != brute_fraction(&t, p, q) {
                return Err(format!("fraction at {q} disagrees with elimination"));
            }
            fractions.insert(f);
        }
        if fractions.len() != family.len() {
            return Err(format!("context {context}: repeated fractions among satellites"));
        }

        for &q in &sats {
            let a = t.parent(q).unwrap();
            let b = t.second_proximity(q).unwrap();
            let (lo, hi) = if fraction_at::<BigInt>(&t, p, a).unwrap() < fraction_at::<BigInt>(&t, p, b).unwrap() {
                (a, b)
            } else {
                (b, a)
            };
            let comparable = |x: PointId| !t.is_origin(x);
            if comparable(lo) && cmp(&t, lo, q) != PrecOrdering::Less {
                return Err(format!("{q} is not above its smaller proximity {lo}"));
            }
            if comparable(hi) && cmp(&t, q, hi) != PrecOrdering::Less {
                return Err(format!("{q} is not below its larger proximity {hi}"));
            }
            let (fq, flo, fhi) = (brute_fraction(&t, p, q), brute_fraction(&t, p, lo), brute_fraction(&t, p, hi));
            if !(flo < fq && fq < fhi) {
                return Err(format!("fraction of {q} not between its proximities"));
            }
            checked += 1;
            let children: Vec<PointId> = t.children(q).to_vec();
            if children.len() == 2 {
                let first = first_satellite::<BigInt>(&mut t, q).unwrap();
                let second = second_satellite::<BigInt>(&mut t, q).unwrap();
                if cmp(&t, first, q) != PrecOrdering::Less || cmp(&t, q, second) != PrecOrdering::Less {
                    return Err(format!("satellites of {q} out of order"));
                }
                let fs = brute_fraction(&t, p, second);
                if !(fq < fs && fs < fhi) {
                    return Err(format!("second satellite of {q} not inside ({q}, {hi})"));
                }
                for &x in &sats {
                    if t.precedes_or_eq(first, x) && cmp(&t, x, q) != PrecOrdering::Less {
                        return Err(format!("{x} after the first satellite of {q} is not below it"));
                    }
                }
            }
        }

        // total order on p and its satellites
        for &a in &family {
            for &b in &family {
                let o = cmp(&t, a, b);
                checked += 1;
                let want = match (a == b, fraction_at::<BigInt>(&t, p, a).unwrap() < fraction_at(&t, p, b).unwrap()) {
                    (true, _) => PrecOrdering::Equal,
                    (false, true) => PrecOrdering::Less,
                    (false, false) => PrecOrdering::Greater,
                };
                if o != want || cmp(&t, b, a) != o.reverse() {
                    return Err(format!("{a} vs {b}: got {o:?}, want {want:?}"));
                }
            }
        }
    }
    Ok(format!("{checked} comparisons"))
}

// ==== oracle

/// Random curve with every free point of the curve given satellites up to
/// depth 3 (off the curve unless already there).
fn enriched_curve(seed: u64) -> (ArenaTree, CurveCluster<BigInt>) {
    let (mut t, c): (ArenaTree, CurveCluster<BigInt>) = random_curve(seed, 9, 12);
    let free: Vec<PointId> =
        c.multiplicities().points().filter(|p| !t.is_origin(*p) && t.is_free(*p)).collect();
    for p in free {
        grow_satellites(&mut t, p, 3);
    }
    (t, c)
}

/// One random curve per case; a few of its ordered satellite pairs are
/// checked.
pub fn growth(cases: u32) -> Result<String, String> {
    let mut samples = 0usize;
    let mut strict = 0usize;
    for seed in 0..u64::from(cases) {
        let (t, c) = enriched_curve(seed);
        let mut candidates = Vec::new();
        for p in t.ids().filter(|p| !t.is_origin(*p) && t.is_free(*p)) {
            let mut fam: Vec<PointId> = t.ids().filter(|q| t.is_satellite_of(*q, p)).collect();
            fam.push(p);
            for &q1 in fam.iter().filter(|q| **q != p) {
                for &q2 in &fam {
                    if q1 != q2 {
                        candidates.push(GrowthSample { p, q1, q2 });
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch: Vec<GrowthSample> = candidates
            .choose_multiple(&mut rng, 8)
            .filter(|s| cmp(&t, s.q1, s.q2) == PrecOrdering::Less)
            .take(3)
            .copied()
            .collect();
        for v in check_growth(&t, &c, &batch).map_err(|e| e.to_string())? {
            match v {
                GrowthViolation::Ambiguous(_) => {}
                other => return Err(format!("seed {seed}: {other:?}")),
            }
        }
        for s in &batch {
            let i1 = invariant_quotient(&t, &c, s.q1).unwrap().value;
            let i2 = invariant_quotient(&t, &c, s.q2).unwrap().value;
            strict += usize::from(i1 < i2);
        }
        samples += batch.len();
    }
    if samples < cases as usize {
        return Err(format!("only {samples} pairs"));
    }
    Ok(format!("{cases} curves, {samples} pairs, {strict} strict"))
}

pub fn refined_bound(cases: u32) -> Result<String, String> {
    let mut hits = 0usize;
    let mut families = 0usize;
    for seed in 0..u64::from(cases) {
        let (t, c): (ArenaTree, CurveCluster<BigInt>) = random_curve(seed, 10, 14);
        let r = rupture_points(&t, &c).unwrap();
        for p in c.multiplicities().points().filter(|p| !t.is_origin(*p) && t.is_free(*p)) {
            let local = polar_invariants_local(&t, &c, p).unwrap();
            let distinct: BTreeSet<_> = local.values().collect();
            if distinct.len() != local.len() {
                return Err(format!("seed {seed}: repeated local invariants at {p}"));
            }
            families += 1;
            let rho = excess(&t, c.multiplicities(), p).unwrap();
            let free_child = t.children(p).iter().any(|x| t.is_free(*x) && c.contains(*x));
            if !rho.is_one() || free_child {
                continue;
            }
            let Some(q) = top_rupture_point::<BigInt>(&t, &r, p).unwrap() else { continue };
            if q == p {
                continue;
            }
            let ip = invariant_quotient(&t, &c, p).unwrap().value;
            let iq = invariant_quotient(&t, &c, q).unwrap().value;
            let n = chain_weights::<BigInt>(&t, p).unwrap()[0].1.clone();
            let low = ip.clone() - Ratio::new(BigInt::one(), n);
            if !(low < iq && iq < ip) {
                return Err(format!("seed {seed}: I({q}) = {iq} outside ({low}, {ip})"));
            }
            hits += 1;
        }
    }
    if hits == 0 {
        return Err("no curve met the hypotheses".into());
    }
    Ok(format!("{families} families, {hits} bounded"))
}

pub fn random_curves(cases: u32) -> Result<String, String> {
    for seed in 0..u64::from(cases) {
        let max_points = 1 + (seed % 12) as usize;
        let max_mult = 2 + seed % 10;
        let (t, c): (ArenaTree, CurveCluster<BigInt>) = random_curve(seed, max_points, max_mult);
        let (t2, c2): (ArenaTree, CurveCluster<BigInt>) = random_curve(seed, max_points, max_mult);
        let m = c.multiplicities();
        if t.len() > max_points || m.weight_or_zero(PointId::ORIGIN) > BigInt::from(max_mult) {
            return Err(format!("seed {seed}: bounds exceeded"));
        }
        if canonical_form(&t, m).unwrap() != canonical_form(&t2, c2.multiplicities()).unwrap() {
            return Err(format!("seed {seed}: not reproducible"));
        }
        if CurveCluster::new(&t, m.clone()).is_err() || !is_consistent(&t, m).unwrap() {
            return Err(format!("seed {seed}: invalid curve"));
        }
    }
    Ok(format!("{cases} seeds"))
}

// ==== recovery

/// Both variants give the same result, or the same failure.
pub fn variant_agreement(cases: u32) -> Result<String, String> {
    let mut recovered = 0;
    for seed in 0..u64::from(cases) {
        let x = perturb(seed);
        let (mut a, mut b) = (x.tree.clone(), x.tree.clone());
        let ra = recover(&mut a, &x.bp);
        let rb = recover_grouped(&mut b, &x.bp);
        if ra != rb {
            return Err(format!("seed {seed} ({}): variants disagree", x.source));
        }
        recovered += usize::from(ra.is_ok());
    }
    Ok(format!("{cases} inputs, {recovered} recovered, {} rejected alike", cases as usize - recovered))
}

fn check_result(tree: &ArenaTree, bp: &WeightedCluster<BigInt>, r: &RecoveryResult<BigInt>) -> Result<(), String> {
    let dic = dicritical_points(tree, bp).unwrap();
    if r.rupture_points.len() > dic.len() {
        return Err("more rupture points than dicriticals".into());
    }
    for a in r.associations.iter().filter(|a| !tree.is_origin(a.dicritical)) {
        let o = prec_compare::<BigInt>(tree, a.rupture, a.dicritical);
        if !matches!(o, Ok(PrecOrdering::Less | PrecOrdering::Equal)) {
            return Err(format!("rupture point {} not below dicritical {}", a.rupture, a.dicritical));
        }
    }
    let curve = CurveCluster::new(tree, r.multiplicities.clone()).map_err(|e| e.to_string())?;
    if rupture_points(tree, &curve).unwrap() != r.rupture_points {
        return Err("oracle rupture points differ".into());
    }
    for a in &r.associations {
        if invariant_quotient(tree, &curve, a.rupture).unwrap().value != a.invariant {
            return Err(format!("oracle invariant differs at {}", a.rupture));
        }
    }
    let mut inv = MorphismInvariants::compute(tree, bp).unwrap();
    let free: BTreeSet<PointId> = r.singular_points.iter().filter(|p| !tree.is_satellite(**p)).copied().collect();
    for p in free {
        let mut seen = BTreeSet::new();
        for &q in r.rupture_points.iter().filter(|q| **q == p || tree.is_satellite_of(**q, p)) {
            if !seen.insert(inv.height_quotient(tree, q).unwrap()) {
                return Err(format!("repeated quotient among rupture points at {p}"));
            }
        }
    }
    Ok(())
}

pub fn recovery_invariance(cases: u32) -> Result<String, String> {
    let mut recovered = 0;
    for seed in 0..u64::from(cases) {
        let x = perturb(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let (t2, ks, _) = shuffle_arena(&x.tree, &[&x.bp], &mut rng);
        let (mut a, mut b) = (x.tree.clone(), t2);
        let ra: Result<_, RecoveryFailure<BigInt>> = recover(&mut a, &x.bp);
        let rb = recover(&mut b, &ks[0]);
        match (ra, rb) {
            (Ok(ra), Ok(rb)) => {
                if canonical_form(&a, &ra.values).unwrap() != canonical_form(&b, &rb.values).unwrap()
                    || !are_similar(&a, &ra.multiplicities, &b, &rb.multiplicities).unwrap()
                {
                    return Err(format!("seed {seed}: relabeled input changed the result"));
                }
                check_result(&a, &x.bp, &ra).map_err(|e| format!("seed {seed} ({}): {e}", x.source))?;
                recovered += 1;
            }
            (Err(_), Err(_)) => {}
            _ => return Err(format!("seed {seed}: relabeling changed success")),
        }
    }
    if recovered == 0 {
        return Err("nothing recovered".into());
    }
    Ok(format!("{cases} inputs, {recovered} recovered"))
}
