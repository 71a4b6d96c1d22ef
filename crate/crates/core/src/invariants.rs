//! Depth-bounded closure operators.
//!
//! Every operator iterates a generator step from a seed and reports how it
//! stopped. `Stabilized { at_depth: k }` means the `k`-th application of the
//! step (counting from zero) left the set unchanged, so the returned set is a
//! genuine fixed point. All iterative unions approach their limit from below.
//!
//! | operator | step                                   |
//! |----------|----------------------------------------|
//! | `pinv`   | `A ∪ f(A \ S)`                         |
//! | `ninv`   | `A ∪ f⁻¹(A)`                           |
//! | `inv`    | `B = A ∪ f(A \ S)`, then `B ∪ f⁻¹(B)`  |
//!
//! Point-seeded variants work on finite clouds and only expand the newest
//! points each round.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cellgraph::{minimal_components, DecomposeParams, TransitionGraph};
use crate::pwmap::ModifiedMap;
use crate::ratset::{FinitePointSet, OpenIntervalSet};
use crate::Scalar;

/// Cap on intervals, points or cells held by a single result.
pub const DEFAULT_COMPLEXITY_CAP: usize = 100_000;

/// Environment variable overriding [`DEFAULT_COMPLEXITY_CAP`].
pub const CAP_ENV_VAR: &str = "PMDECOMP_CELL_CAP";

/// The cap from `PMDECOMP_CELL_CAP`, falling back to the default when unset.
pub fn complexity_cap_from_env() -> Result<usize, String> {
    match std::env::var(CAP_ENV_VAR) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(cap),
            _ => Err(format!("{CAP_ENV_VAR} must be a positive integer, got {raw:?}")),
        },
        Err(_) => Ok(DEFAULT_COMPLEXITY_CAP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Status {
    Stabilized { at_depth: usize },
    Truncated { depth: usize },
    ComplexityExceeded { depth: usize },
}

impl Status {
    pub fn is_stabilized(&self) -> bool {
        matches!(self, Status::Stabilized { .. })
    }

    pub fn is_complexity_exceeded(&self) -> bool {
        matches!(self, Status::ComplexityExceeded { .. })
    }

    /// The weaker of two statuses: a cap hit dominates truncation, which
    /// dominates stabilization.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (ComplexityExceeded { depth: a }, ComplexityExceeded { depth: b }) => {
                ComplexityExceeded { depth: a.min(b) }
            }
            (ComplexityExceeded { depth }, _) | (_, ComplexityExceeded { depth }) => ComplexityExceeded { depth },
            (Truncated { depth: a }, Truncated { depth: b }) => Truncated { depth: a.max(b) },
            (Truncated { depth }, _) | (_, Truncated { depth }) => Truncated { depth },
            (Stabilized { at_depth: a }, Stabilized { at_depth: b }) => Stabilized { at_depth: a.max(b) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    UnderApproximation,
    OverApproximation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct BoundedResult<S> {
    pub set: OpenIntervalSet<S>,
    pub status: Status,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct PointCloudResult<S> {
    pub points: FinitePointSet<S>,
    pub status: Status,
    pub direction: Direction,
}

/// The closure operators of one model under one complexity cap.
#[derive(Debug, Clone, Copy)]
pub struct ClosureOps<'a, S> {
    model: &'a ModifiedMap<S>,
    cap: usize,
}

impl<'a, S: Scalar> ClosureOps<'a, S> {
    pub fn new(model: &'a ModifiedMap<S>, cap: usize) -> Self {
        ClosureOps { model, cap }
    }

    pub fn model(&self) -> &'a ModifiedMap<S> {
        self.model
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn saturate(
        &self,
        seed: &OpenIntervalSet<S>,
        max_depth: usize,
        step: impl Fn(&OpenIntervalSet<S>) -> OpenIntervalSet<S>,
    ) -> BoundedResult<S> {
        let mut current = seed.clip(self.model.lower(), self.model.upper());
        let mut status = Status::Truncated { depth: max_depth };
        for k in 0..max_depth {
            let next = step(&current);
            if next == current {
                status = Status::Stabilized { at_depth: k };
                break;
            }
            if next.len() > self.cap {
                status = Status::ComplexityExceeded { depth: k };
                break;
            }
            current = next;
        }
        BoundedResult {
            set: current,
            status,
            direction: Direction::UnderApproximation,
        }
    }

    pub fn pinv_open(&self, seed: &OpenIntervalSet<S>, max_depth: usize) -> BoundedResult<S> {
        self.saturate(seed, max_depth, |a| a.union(&self.model.image_mod(a)))
    }

    pub fn ninv_open(&self, seed: &OpenIntervalSet<S>, max_depth: usize) -> BoundedResult<S> {
        self.saturate(seed, max_depth, |a| a.union(&self.model.preimage(a)))
    }

    pub fn inv_open(&self, seed: &OpenIntervalSet<S>, max_depth: usize) -> BoundedResult<S> {
        self.saturate(seed, max_depth, |a| {
            let forward = a.union(&self.model.image_mod(a));
            forward.union(&self.model.preimage(&forward))
        })
    }

    fn forward_points(&self, frontier: &[S]) -> Vec<S> {
        frontier
            .iter()
            .filter_map(|x| self.model.apply(x).ok().flatten())
            .collect()
    }

    fn backward_points(&self, frontier: &[S]) -> Vec<S> {
        frontier
            .iter()
            .flat_map(|y| self.model.preimage_points(y).as_slice().to_vec())
            .collect()
    }

    /// Frontier iteration shared by the point operators. `expand` receives the
    /// current frontier and the accumulated set and returns the points new in
    /// this round; a round that would exceed the cap is dropped whole.
    fn saturate_points(
        &self,
        seed: &FinitePointSet<S>,
        max_depth: usize,
        expand: impl Fn(&[S], &BTreeSet<S>) -> Vec<S>,
    ) -> PointCloudResult<S> {
        let mut all: BTreeSet<S> = seed.iter().filter(|x| self.model.in_domain(x)).cloned().collect();
        let mut frontier: Vec<S> = all.iter().cloned().collect();
        let mut status = Status::Truncated { depth: max_depth };
        for k in 0..max_depth {
            let fresh: BTreeSet<S> = expand(&frontier, &all)
                .into_iter()
                .filter(|p| !all.contains(p))
                .collect();
            if fresh.is_empty() {
                status = Status::Stabilized { at_depth: k };
                break;
            }
            if all.len() + fresh.len() > self.cap {
                status = Status::ComplexityExceeded { depth: k };
                break;
            }
            all.extend(fresh.iter().cloned());
            frontier = fresh.into_iter().collect();
        }
        PointCloudResult {
            points: all.into(),
            status,
            direction: Direction::UnderApproximation,
        }
    }

    pub fn pinv_points(&self, seed: &FinitePointSet<S>, max_depth: usize) -> PointCloudResult<S> {
        self.saturate_points(seed, max_depth, |frontier, _| self.forward_points(frontier))
    }

    pub fn ninv_points(&self, seed: &FinitePointSet<S>, max_depth: usize) -> PointCloudResult<S> {
        self.saturate_points(seed, max_depth, |frontier, _| self.backward_points(frontier))
    }

    pub fn inv_points(&self, seed: &FinitePointSet<S>, max_depth: usize) -> PointCloudResult<S> {
        self.saturate_points(seed, max_depth, |frontier, all| {
            let mut out: Vec<S> = self
                .forward_points(frontier)
                .into_iter()
                .filter(|p| !all.contains(p))
                .collect();
            let mut sweep = frontier.to_vec();
            sweep.extend(out.iter().cloned());
            out.extend(self.backward_points(&sweep));
            out
        })
    }

    /// `X \ cl(ninv(S))` at the given depth. Contains the set of points whose
    /// orbits avoid `S` and shrinks as the depth grows.
    pub fn lambda_s(&self, max_depth: usize) -> BoundedResult<S> {
        let cloud = self.ninv_points(self.model.exceptional(), max_depth);
        BoundedResult {
            set: self.model.domain_interior().remove_points(&cloud.points),
            status: cloud.status,
            direction: Direction::OverApproximation,
        }
    }

    /// `(Σ, Z)` at the given depth and at the resolution of `graph`, which must
    /// be built for the same model.
    pub fn sigma_and_zed(&self, graph: &TransitionGraph<S>, max_depth: usize) -> (BoundedResult<S>, BoundedResult<S>) {
        let decomp = minimal_components(graph, self, &DecomposeParams::new(max_depth));
        (decomp.sigma, decomp.zed)
    }
}
