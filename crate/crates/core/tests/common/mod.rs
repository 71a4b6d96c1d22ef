//! Random sets and maps shared by the integration tests.
#![allow(dead_code)]

use pmdecomp::pwmap::{ModifiedMap, PiecewiseAffineMap};
use pmdecomp::ratset::{ClosedIntervalSet, OpenIntervalSet};
use pmdecomp::Scalar;
use rand::Rng;

/// A rational `k/d` in `[0, hi]` with `d ≤ 12`.
pub fn random_point<S: Scalar, R: Rng>(rng: &mut R, hi: i64) -> S {
    let d = rng.gen_range(1..=12);
    S::from_frac(rng.gen_range(0..=hi * d), d)
}

/// Up to `max` random intervals inside `(0, hi)`, touching and overlapping allowed.
pub fn random_open<S: Scalar, R: Rng>(rng: &mut R, hi: i64, max: usize) -> OpenIntervalSet<S> {
    let n = rng.gen_range(0..=max);
    let mut raw = Vec::with_capacity(n);
    while raw.len() < n {
        let a: S = random_point(rng, hi);
        let b: S = random_point(rng, hi);
        if a != b {
            raw.push(if a < b { (a, b) } else { (b, a) });
        }
    }
    // Force some touching pairs so non-regular sets show up often.
    if n > 0 && rng.gen_bool(0.5) {
        let (_, b) = raw[0].clone();
        if b < S::from_int(hi) {
            let c = b.clone() + (S::from_int(hi) - b.clone()) / S::from_int(2);
            raw.push((b, c));
        }
    }
    OpenIntervalSet::normalize(raw).expect("intervals are nondegenerate")
}

/// Random closed intervals and isolated points inside `[0, hi]`.
pub fn random_closed<S: Scalar, R: Rng>(rng: &mut R, hi: i64, max: usize) -> ClosedIntervalSet<S> {
    let n = rng.gen_range(0..=max);
    let raw: Vec<(S, S)> = (0..n)
        .map(|_| {
            let a: S = random_point(rng, hi);
            if rng.gen_bool(0.3) {
                (a.clone(), a)
            } else {
                let b: S = random_point(rng, hi);
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        })
        .collect();
    ClosedIntervalSet::normalize(raw).expect("intervals are ordered")
}

/// `k/16` for `k` in `1..16`, distinct and sorted.
fn interior_grid<R: Rng>(rng: &mut R, count: usize) -> Vec<i64> {
    let mut picks: Vec<i64> = Vec::new();
    while picks.len() < count {
        let k = rng.gen_range(1..16);
        if !picks.contains(&k) {
            picks.push(k);
        }
    }
    picks.sort_unstable();
    picks
}

/// A map on `[0, 1]` with `1..=max_pieces` monotone affine pieces and up to
/// two extra exceptional points.
pub fn random_model<S: Scalar, R: Rng>(rng: &mut R, max_pieces: usize) -> ModifiedMap<S> {
    let p = rng.gen_range(1..=max_pieces);
    let mut grid = vec![0];
    grid.extend(interior_grid(rng, p - 1));
    grid.push(16);
    let breakpoints: Vec<S> = grid.iter().map(|&k| S::from_frac(k, 16)).collect();
    let mut pieces = Vec::with_capacity(p);
    for w in breakpoints.windows(2) {
        let (y0, y1) = loop {
            let y0 = S::from_frac(rng.gen_range(0..=16), 16);
            let y1 = S::from_frac(rng.gen_range(0..=16), 16);
            if y0 != y1 {
                break (y0, y1);
            }
        };
        let slope = (y1 - y0.clone()) / (w[1].clone() - w[0].clone());
        let intercept = y0 - slope.clone() * w[0].clone();
        pieces.push((slope, intercept));
    }
    let extra: Vec<S> = (0..rng.gen_range(0..=2))
        .map(|_| S::from_frac(rng.gen_range(1..32), 32))
        .collect();
    ModifiedMap::new(PiecewiseAffineMap::from_pairs(breakpoints, pieces), extra).expect("pieces map into [0, 1]")
}

/// Representative points of every open cell and every cut of the partition
/// generated by `cuts`: on each open cell membership in any set with these
/// endpoints is constant.
pub fn probes<S: Scalar>(cuts: impl IntoIterator<Item = S>) -> Vec<S> {
    let mut cuts: Vec<S> = cuts.into_iter().collect();
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(2 * cuts.len() + 1);
    for (i, c) in cuts.iter().enumerate() {
        if i == 0 {
            out.push(c.clone() - S::one());
        }
        out.push(c.clone());
        match cuts.get(i + 1) {
            Some(next) => out.push(S::midpoint(c, next)),
            None => out.push(c.clone() + S::one()),
        }
    }
    out
}

pub fn brute_in_closure<S: Scalar>(set: &OpenIntervalSet<S>, x: &S) -> bool {
    set.intervals().iter().any(|iv| &iv.lo <= x && x <= &iv.hi)
}

pub fn brute_in_open<S: Scalar>(set: &OpenIntervalSet<S>, x: &S) -> bool {
    set.intervals().iter().any(|iv| &iv.lo < x && x < &iv.hi)
}

/// Probe points and a step smaller than half of every gap between them.
pub fn probes_and_step<S: Scalar>(sets: &[&OpenIntervalSet<S>]) -> (Vec<S>, S) {
    let cuts = sets
        .iter()
        .flat_map(|s| s.intervals().iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]))
        .chain([S::zero(), S::from_int(2)]);
    let probes = probes(cuts);
    let step = probes
        .windows(2)
        .map(|w| w[1].clone() - w[0].clone())
        .min()
        .expect("at least two probes")
        / S::from_int(4);
    (probes, step)
}

/// Names of the regular open algebra facts that fail for one pair of open
/// sets inside `[0, 2]`; empty when all hold.
pub fn algebra_violations<S: Scalar>(a: &OpenIntervalSet<S>, b: &OpenIntervalSet<S>) -> Vec<&'static str> {
    let mut failed = Vec::new();
    let mut check = |ok: bool, name: &'static str| {
        if !ok {
            failed.push(name);
        }
    };
    let x = ClosedIntervalSet::interval(S::zero(), S::from_int(2)).expect("nonempty domain");
    let (da, db) = (a.diamond(), b.diamond());
    let regular = |s: &OpenIntervalSet<S>| s.diamond() == *s && s.is_regular();

    let (probes, step) = probes_and_step(&[a, b]);
    let membership = probes.iter().all(|p| {
        let expected = [p.clone() - step.clone(), p.clone(), p.clone() + step.clone()]
            .iter()
            .all(|q| brute_in_closure(a, q));
        da.contains(p) == expected
    });
    check(membership, "diamond is int(cl)");

    check(da.diamond() == da, "idempotent");

    let f = a.closure().union(&ClosedIntervalSet::from_points(&b.boundary()));
    check(
        regular(&da) && a.is_regular() == (a.diamond() == *a) && regular(&f.interior()),
        "regular iff diamond iff interior of closed",
    );

    check(regular(&da.intersect(&db)), "intersection regular");

    check(regular(&a.complement_in(&x)), "complement regular");

    let inner = da.intersect(&db);
    check(
        regular(&db.regular_difference(&da)) && (inner == db || !db.regular_difference(&inner).is_empty()),
        "difference regular and nonempty for proper subsets",
    );

    let missing = a.missing_points_of(&da);
    check(
        a.is_subset(&da) && missing.is_some_and(|m| m.is_subset(&a.boundary())),
        "diamond adds only boundary points",
    );

    let meets = a.meets(b);
    let brute_meets = probes.iter().any(|p| brute_in_open(a, p) && brute_in_open(b, p));
    check(
        meets == brute_meets && meets == a.meets(&db) && meets == da.meets(&db),
        "meeting insensitive to diamond",
    );
    failed
}
