//! Brute-force orbit sweeps used to validate decompositions.
//!
//! Orbits are iterated exactly from a uniform rational grid. A repeated exact
//! state closes a cycle, after which the trajectory is extended periodically
//! without further arithmetic.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cellgraph::{CellPartition, Decomposition};
use crate::pwmap::ModifiedMap;
use crate::ratset::{as_text, FinitePointSet, OpenIntervalSet};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Fate {
    /// The orbit reached `•` at this step.
    HitBullet {
        step: usize,
    },
    Surviving,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct OrbitSample<S> {
    #[serde(with = "as_text")]
    pub start: S,
    pub steps: usize,
    pub fate: Fate,
    /// `(first step of the cycle, period)` when the orbit repeated a state.
    pub cycle: Option<(usize, usize)>,
    /// Every point of the orbit up to `steps` or `•`.
    pub visited: FinitePointSet<S>,
    /// Points at steps `steps/2 ..= steps` (before `•` if it came earlier).
    pub tail: FinitePointSet<S>,
    /// `(cell, visits)` over the whole trajectory, sorted by cell.
    pub cell_visits: Vec<(usize, usize)>,
}

/// Exact orbit of `start`, extended periodically once a state repeats.
pub fn sample_orbit<S: Scalar>(
    model: &ModifiedMap<S>,
    partition: Option<&CellPartition<S>>,
    start: S,
    steps: usize,
) -> OrbitSample<S> {
    // Brent's cycle detection: equality tests only, since hashing a ratio
    // expands its continued fraction.
    let mut path: Vec<S> = vec![start.clone()];
    let mut fate = Fate::Surviving;
    let mut cycle = None;
    let (mut power, mut lam, mut tortoise) = (1usize, 1usize, 0usize);
    while path.len() <= steps {
        let x = path.last().expect("path starts nonempty");
        let Some(y) = model.apply(x).expect("orbits stay in the domain") else {
            fate = Fate::HitBullet { step: path.len() };
            break;
        };
        path.push(y);
        let hare = path.len() - 1;
        if S::compare(&path[tortoise], &path[hare]).is_eq() {
            let first = (0..)
                .find(|&i| S::compare(&path[i], &path[i + lam]).is_eq())
                .expect("a repeat exists");
            path.truncate(first + lam);
            cycle = Some((first, lam));
            break;
        }
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        lam += 1;
    }
    let at = |t: usize| -> &S {
        match cycle {
            Some((first, period)) if t >= path.len() => &path[first + (t - first) % period],
            _ => &path[t],
        }
    };
    let last = match fate {
        Fate::HitBullet { step } => step - 1,
        Fate::Surviving => steps,
    };
    let mut visits: BTreeMap<usize, usize> = BTreeMap::new();
    if let Some(p) = partition {
        for t in 0..=last {
            if let Some(cell) = p.cell_of(at(t)) {
                *visits.entry(cell).or_default() += 1;
            }
        }
    }
    let tail_start = steps / 2;
    let tail: FinitePointSet<S> = (tail_start..=last).map(|t| at(t).clone()).collect();
    OrbitSample {
        start,
        steps,
        fate,
        cycle,
        visited: path.into_iter().collect(),
        tail,
        cell_visits: visits.into_iter().collect(),
    }
}

/// Orbits from the `grid_n + 1` equally spaced points of the domain that are not in `S`.
pub fn sweep<S: Scalar>(
    model: &ModifiedMap<S>,
    partition: Option<&CellPartition<S>>,
    grid_n: usize,
    steps: usize,
) -> Vec<OrbitSample<S>> {
    let n = grid_n.max(1) as i64;
    let length = model.domain_length();
    (0..=n)
        .map(|k| model.lower().clone() + length.clone() * S::from_frac(k, n))
        .filter(|x| !model.exceptional().contains(x))
        .map(|x| sample_orbit(model, partition, x, steps))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct ConfinementViolation<S> {
    #[serde(with = "as_text")]
    pub start: S,
    pub component: usize,
    #[serde(with = "as_text")]
    pub escaped_to: S,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct SplitDiagnostic<S> {
    pub component: usize,
    #[serde(with = "as_text")]
    pub point: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct OracleVerdict<S> {
    pub samples: usize,
    pub surviving: usize,
    /// Surviving samples whose whole tail lies in the closure of one piece.
    pub agreeing: usize,
    pub agreement: f64,
    /// Surviving samples per piece label, by tail majority.
    pub membership: BTreeMap<String, usize>,
    pub disagreeing_starts: Vec<String>,
    pub confinement_violations: Vec<ConfinementViolation<S>>,
    pub split_possible: Vec<SplitDiagnostic<S>>,
}

impl<S: Scalar> OracleVerdict<S> {
    pub fn is_clean(&self) -> bool {
        self.agreeing == self.surviving && self.confinement_violations.is_empty() && self.split_possible.is_empty()
    }
}

/// Labels and regions of the pieces a sample can be assigned to: every
/// component, then the Λ interior.
pub fn pieces<S: Scalar>(decomp: &Decomposition<S>) -> Vec<(String, OpenIntervalSet<S>)> {
    let mut out: Vec<(String, OpenIntervalSet<S>)> = decomp
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("component_{i}"), c.region.clone()))
        .collect();
    if !decomp.zed.set.is_empty() {
        out.push(("zed".to_string(), decomp.zed.set.clone()));
    }
    out
}

/// The label of the piece whose closure holds most tail points, and whether
/// it holds all of them.
pub fn assign<S: Scalar>(pieces: &[(String, OpenIntervalSet<S>)], sample: &OrbitSample<S>) -> Option<(usize, bool)> {
    let mut best: Option<(usize, usize)> = None;
    for (k, (_, region)) in pieces.iter().enumerate() {
        let closure = region.closure();
        let count = sample.tail.iter().filter(|p| closure.contains(p)).count();
        if count > 0 && best.is_none_or(|(_, c)| count > c) {
            best = Some((k, count));
        }
    }
    best.map(|(k, count)| (k, count == sample.tail.len()))
}

pub fn validate<S: Scalar>(
    model: &ModifiedMap<S>,
    decomp: &Decomposition<S>,
    samples: &[OrbitSample<S>],
) -> OracleVerdict<S> {
    let pieces = pieces(decomp);
    let mut membership: BTreeMap<String, usize> = pieces.iter().map(|(l, _)| (l.clone(), 0)).collect();
    let mut surviving = 0;
    let mut agreeing = 0;
    let mut disagreeing_starts = Vec::new();
    for sample in samples.iter().filter(|s| s.fate == Fate::Surviving) {
        surviving += 1;
        match assign(&pieces, sample) {
            Some((k, whole)) => {
                *membership.entry(pieces[k].0.clone()).or_default() += 1;
                if whole {
                    agreeing += 1;
                } else {
                    disagreeing_starts.push(sample.start.to_string());
                }
            }
            None => disagreeing_starts.push(sample.start.to_string()),
        }
    }

    let mut confinement_violations = Vec::new();
    for sample in samples {
        let Some(k) = decomp.component_of(&sample.start) else {
            continue;
        };
        let closure = decomp.components[k].region.closure();
        if let Some(out) = sample.visited.iter().find(|p| !closure.contains(p)) {
            confinement_violations.push(ConfinementViolation {
                start: sample.start.clone(),
                component: k,
                escaped_to: out.clone(),
            });
        }
    }

    let mut split_possible = Vec::new();
    for (k, component) in decomp.components.iter().enumerate() {
        for s in model.exceptional().iter().filter(|s| component.region.contains(s)) {
            let inside: Vec<&OrbitSample<S>> = samples
                .iter()
                .filter(|x| x.fate == Fate::Surviving && component.region.contains(&x.start))
                .collect();
            let left = inside.iter().any(|x| &x.start < s);
            let right = inside.iter().any(|x| &x.start > s);
            let crossed = inside
                .iter()
                .any(|x| x.tail.first().is_some_and(|lo| lo < s) && x.tail.last().is_some_and(|hi| hi > s));
            if left && right && !crossed {
                split_possible.push(SplitDiagnostic {
                    component: k,
                    point: s.clone(),
                });
            }
        }
    }

    OracleVerdict {
        samples: samples.len(),
        surviving,
        agreeing,
        agreement: if surviving == 0 {
            1.0
        } else {
            agreeing as f64 / surviving as f64
        },
        membership,
        disagreeing_starts,
        confinement_violations,
        split_possible,
    }
}

/// One row per sample: `start,fate,piece`.
pub fn samples_csv<S: Scalar>(decomp: &Decomposition<S>, samples: &[OrbitSample<S>]) -> String {
    let pieces = pieces(decomp);
    let mut out = String::from("start,fate,component\n");
    for sample in samples {
        let fate = match sample.fate {
            Fate::HitBullet { step } => format!("bullet@{step}"),
            Fate::Surviving => "surviving".to_string(),
        };
        let label = match (sample.fate, assign(&pieces, sample)) {
            (Fate::Surviving, Some((k, _))) => pieces[k].0.as_str(),
            _ => "none",
        };
        out.push_str(&format!("{},{},{}\n", sample.start, fate, label));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GapStatistics<S> {
    #[serde(with = "as_text")]
    pub max_gap: S,
    /// `k → number of gaps g with 2^k ≤ g < 2^(k+1)`.
    pub histogram: BTreeMap<i32, usize>,
}

fn floor_log2<S: Scalar>(g: &S) -> i32 {
    let two = S::from_int(2);
    let mut k = 0i32;
    let mut power = S::one();
    while g < &power {
        power = power / two.clone();
        k -= 1;
    }
    while g >= &(power.clone() * two.clone()) {
        power = power * two.clone();
        k += 1;
    }
    k
}

/// Gaps between consecutive members of `{lo} ∪ (cloud ∩ [lo,hi]) ∪ {hi}`.
pub fn gap_statistics<S: Scalar>(cloud: &FinitePointSet<S>, lo: &S, hi: &S) -> GapStatistics<S> {
    let mut histogram = BTreeMap::new();
    let mut prev = lo.clone();
    let mut max_gap = S::zero();
    let inner = cloud.range_closed(lo, hi);
    for p in inner.iter().chain(std::iter::once(hi)) {
        let gap = p.clone() - prev.clone();
        if gap.is_positive() {
            *histogram.entry(floor_log2(&gap)).or_default() += 1;
            if gap > max_gap {
                max_gap = gap.clone();
            }
        }
        prev = p.clone();
    }
    GapStatistics { max_gap, histogram }
}
