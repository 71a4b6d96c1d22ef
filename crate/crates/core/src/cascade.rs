//! Transitive cascades inside a computed component.
//!
//! A basis cell `O_k` is saturated forward to `V_k = ⋄pinv(O_k)` at cell
//! level and the stages are the running intersections
//! `U_n = V_1 ∩ … ∩ V_n`. Stage regions are regular open because every
//! stage is a union of whole cells regularized by `⋄`.

use serde::Serialize;
use thiserror::Error;

use crate::cellgraph::{intersect_sorted, Component, TransitionGraph};
use crate::invariants::Status;
use crate::pwmap::{ModelError, ModifiedMap};
use crate::ratset::{ClosedIntervalSet, OpenIntervalSet};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CascadeError {
    #[error("a cascade needs at least one basis cell")]
    EmptyBasis,
    #[error("stage {stage} is empty; the component is not minimal at this resolution")]
    EmptyStage { stage: usize },
    #[error("stage {stage} generates {found}, not the component {expected}")]
    DomainMismatch {
        stage: usize,
        expected: String,
        found: String,
    },
}

impl CascadeError {
    pub fn kind(&self) -> &'static str {
        match self {
            CascadeError::EmptyBasis => "EmptyBasis",
            CascadeError::EmptyStage { .. } => "EmptyStage",
            CascadeError::DomainMismatch { .. } => "DomainMismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Stage<S> {
    /// `⋄pinv` of this stage's basis cell.
    pub saturation: OpenIntervalSet<S>,
    pub saturation_status: Status,
    /// Running intersection of saturations up to this stage.
    pub region: OpenIntervalSet<S>,
    #[serde(skip)]
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Cascade<S> {
    pub component: OpenIntervalSet<S>,
    #[serde(skip)]
    pub component_cells: Vec<usize>,
    pub basis: Vec<usize>,
    pub depth: usize,
    pub stages: Vec<Stage<S>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct CoreReport<S> {
    pub stages_used: usize,
    pub closed: ClosedIntervalSet<S>,
    pub diamond: OpenIntervalSet<S>,
    /// First stage (1-based) whose region equals `diamond`.
    pub matching_stage: Option<usize>,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    MutuallyCofinal,
    Disjoint,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageHit {
    pub stage: usize,
    /// Least `m` with `f^m(x)` in the stage; `None` when the horizon or `•` came first.
    pub hit_at: Option<usize>,
}

/// Builds `m` stages from the first `m` cells of the component, each
/// saturated forward for at most `depth` graph hops.
pub fn build_cascade<S: Scalar>(
    graph: &TransitionGraph<S>,
    component: &Component<S>,
    m: usize,
    depth: usize,
) -> Result<Cascade<S>, CascadeError> {
    let basis = component.cells.iter().copied().take(m).collect();
    build_cascade_with_basis(graph, component, basis, depth)
}

/// As [`build_cascade`] with an explicit basis of cells of the component.
pub fn build_cascade_with_basis<S: Scalar>(
    graph: &TransitionGraph<S>,
    component: &Component<S>,
    basis: Vec<usize>,
    depth: usize,
) -> Result<Cascade<S>, CascadeError> {
    if basis.is_empty() {
        return Err(CascadeError::EmptyBasis);
    }
    let partition = graph.partition();
    let mut stages: Vec<Stage<S>> = Vec::with_capacity(basis.len());
    for (k, &cell) in basis.iter().enumerate() {
        let (reach, exhausted) = graph.forward_closure(&[cell], Some(depth));
        let saturation_status = if exhausted {
            Status::Stabilized { at_depth: depth }
        } else {
            Status::Truncated { depth }
        };
        let cells = match stages.last() {
            Some(prev) => intersect_sorted(&prev.cells, &reach),
            None => reach.clone(),
        };
        if cells.is_empty() {
            return Err(CascadeError::EmptyStage { stage: k + 1 });
        }
        stages.push(Stage {
            saturation: partition.region(&reach),
            saturation_status,
            region: partition.region(&cells),
            cells,
        });
    }
    Ok(Cascade {
        component: component.region.clone(),
        component_cells: component.cells.clone(),
        basis,
        depth,
        stages,
    })
}

impl<S: Scalar> Cascade<S> {
    /// `⋂_{n ≤ N} cl(U_n)` and its `⋄`.
    pub fn core(&self, n: usize) -> CoreReport<S> {
        let used = n.clamp(1, self.stages.len());
        let closed = self.stages[..used]
            .iter()
            .map(|s| s.region.closure())
            .reduce(|acc, c| acc.intersect(&c))
            .expect("cascades have stages");
        let diamond = closed.interior().diamond();
        let matching_stage = self.stages[..used]
            .iter()
            .position(|s| s.region == diamond)
            .map(|k| k + 1);
        let status = self.stages[..used]
            .iter()
            .fold(Status::Stabilized { at_depth: 0 }, |acc, s| {
                acc.combine(s.saturation_status)
            });
        CoreReport {
            stages_used: used,
            closed,
            diamond,
            matching_stage,
            status,
        }
    }

    /// `⋄inv(U_n)` at cell level, checked equal to the component for every stage.
    pub fn domain(&self, graph: &TransitionGraph<S>) -> Result<OpenIntervalSet<S>, CascadeError> {
        for (k, stage) in self.stages.iter().enumerate() {
            let hull = graph.grand_orbit_component(&stage.cells, None);
            if hull != self.component_cells {
                return Err(CascadeError::DomainMismatch {
                    stage: k + 1,
                    expected: self.component.to_string(),
                    found: graph.partition().region(&hull).to_string(),
                });
            }
        }
        Ok(self.component.clone())
    }

    /// Mutual cofinality test against another cascade at the same resolution.
    pub fn equivalent(&self, other: &Cascade<S>) -> Equivalence {
        if self.component != other.component {
            return Equivalence::Disjoint;
        }
        let cofinal_in = |a: &Cascade<S>, b: &Cascade<S>| {
            b.stages
                .iter()
                .all(|target| a.stages.iter().any(|s| s.region.is_subset(&target.region)))
        };
        if cofinal_in(self, other) && cofinal_in(other, self) {
            Equivalence::MutuallyCofinal
        } else {
            Equivalence::Unknown
        }
    }

    /// For each stage, the first time the orbit of `x` enters it.
    pub fn typical_target_membership(
        &self,
        model: &ModifiedMap<S>,
        x: &S,
        horizon: usize,
    ) -> Result<Vec<StageHit>, ModelError> {
        let orbit = model.forward_orbit(x, horizon)?;
        Ok(self
            .stages
            .iter()
            .enumerate()
            .map(|(k, stage)| StageHit {
                stage: k + 1,
                hit_at: orbit
                    .iter()
                    .position(|p| p.as_point().is_some_and(|y| stage.region.contains(y))),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellgraph::{minimal_components, DecomposeParams, Decomposition};
    use crate::invariants::{ClosureOps, DEFAULT_COMPLEXITY_CAP};
    use crate::models;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn open(raw: &[(i64, i64, i64, i64)]) -> OpenIntervalSet<Rational> {
        OpenIntervalSet::normalize(raw.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d)))).unwrap()
    }

    fn setup(model: &ModifiedMap<Rational>, delta: Rational) -> (TransitionGraph<Rational>, Decomposition<Rational>) {
        let g = TransitionGraph::build(model, delta, DEFAULT_COMPLEXITY_CAP).unwrap();
        let ops = ClosureOps::new(model, DEFAULT_COMPLEXITY_CAP);
        let d = minimal_components(&g, &ops, &DecomposeParams::new(12));
        (g, d)
    }

    /// A component made of every cell, bypassing the seed clouds.
    fn whole(g: &TransitionGraph<Rational>) -> Component<Rational> {
        let cells: Vec<usize> = (0..g.len()).collect();
        Component {
            witnesses: Default::default(),
            region: g.partition().region(&cells),
            cells,
            transitivity: None,
        }
    }

    #[test]
    fn tent_quarter_resolution() {
        let tent = models::tent();
        let g = TransitionGraph::build(&tent, r(1, 4), 100).unwrap();
        let c = build_cascade(&g, &whole(&g), 2, 64).unwrap();
        for stage in &c.stages {
            assert_eq!(stage.saturation, open(&[(0, 1, 1, 1)]));
            assert_eq!(stage.region, open(&[(0, 1, 1, 1)]));
        }
        let core = c.core(2);
        assert_eq!(core.closed, ClosedIntervalSet::interval(r(0, 1), r(1, 1)).unwrap());
        assert_eq!(core.matching_stage, Some(1));
        assert_eq!(c.domain(&g).unwrap(), open(&[(0, 1, 1, 1)]));
    }

    #[test]
    fn single_stage_is_constant() {
        let tent = models::tent();
        let (g, d) = setup(&tent, r(1, 64));
        let c = build_cascade(&g, &d.components[0], 1, 64).unwrap();
        assert_eq!(c.stages.len(), 1);
        assert_eq!(c.stages[0].region, c.stages[0].saturation);
        let core = c.core(1);
        assert_eq!(core.closed, c.stages[0].region.closure());
        assert_eq!(core.diamond, c.stages[0].region);
    }

    #[test]
    fn two_component_cascades() {
        let model = models::two_component();
        let (g, d) = setup(&model, r(1, 64));
        let left = build_cascade(&g, &d.components[0], 4, 64).unwrap();
        let right = build_cascade(&g, &d.components[1], 4, 64).unwrap();
        for s in &left.stages {
            assert_eq!(s.region, open(&[(0, 1, 1, 2)]));
        }
        assert_eq!(right.domain(&g).unwrap(), open(&[(1, 2, 1, 1)]));
        assert_eq!(left.equivalent(&right), Equivalence::Disjoint);
        assert_eq!(left.equivalent(&left), Equivalence::MutuallyCofinal);
        let hits = right.typical_target_membership(&model, &r(1, 5), 200).unwrap();
        assert!(hits.iter().all(|h| h.hit_at.is_none()));
    }

    #[test]
    fn different_bases_are_cofinal() {
        let tent = models::tent();
        let (g, d) = setup(&tent, r(1, 64));
        let component = &d.components[0];
        let a = build_cascade(&g, component, 4, 64).unwrap();
        let tail = component.cells[component.cells.len() - 3..].to_vec();
        let b = build_cascade_with_basis(&g, component, tail, 64).unwrap();
        assert_eq!(a.equivalent(&b), Equivalence::MutuallyCofinal);
        assert_eq!(b.equivalent(&a), Equivalence::MutuallyCofinal);
    }

    #[test]
    fn shallow_saturation_shrinks_stages() {
        let tent = models::tent();
        let (g, d) = setup(&tent, r(1, 256));
        let c = build_cascade(&g, &d.components[0], 3, 2).unwrap();
        assert!(c
            .stages
            .iter()
            .all(|s| s.saturation_status == Status::Truncated { depth: 2 }));
        assert!(c.stages.windows(2).all(|w| w[1].region.is_subset(&w[0].region)));
        let core = c.core(3);
        assert!(!core.status.is_stabilized());
        assert!(matches!(
            build_cascade(&g, &d.components[0], 0, 2),
            Err(CascadeError::EmptyBasis)
        ));
    }

    #[test]
    fn disjoint_saturations_report_empty_stage() {
        let model = models::two_component();
        let g = TransitionGraph::build(&model, r(1, 8), 100).unwrap();
        let mut merged = whole(&g);
        merged.cells = vec![0, 7];
        let err = build_cascade(&g, &merged, 2, 64).unwrap_err();
        assert_eq!(err, CascadeError::EmptyStage { stage: 2 });
    }

    #[test]
    fn target_membership_examples() {
        let tent = models::tent();
        let g = TransitionGraph::build(&tent, r(1, 4), 100).unwrap();
        let c = build_cascade(&g, &whole(&g), 1, 64).unwrap();
        let hits = c.typical_target_membership(&tent, &r(2, 7), 10).unwrap();
        assert_eq!(
            hits,
            vec![StageHit {
                stage: 1,
                hit_at: Some(0)
            }]
        );
        let mut avoiding = c.clone();
        avoiding.stages[0].region = open(&[(0, 1, 1, 4)]);
        let hits = avoiding.typical_target_membership(&tent, &r(1, 4), 10).unwrap();
        assert_eq!(hits[0].hit_at, None);
    }
}
