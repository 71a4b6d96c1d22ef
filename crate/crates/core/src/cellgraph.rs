//! Resolution-δ discretization of a modified map.
//!
//! The domain is cut at every point of `S` and on a uniform grid of step `δ`.
//! Each open cell lies inside one affine piece, so its image is one open
//! interval and its successors form a contiguous range of cells. Edges need
//! positive-length overlap; touching at a cut creates no edge.
//!
//! Minimal components are extracted per exceptional point `c`: the exact
//! backward cloud of `c` is computed, the cells it fills densely (every gap
//! at most a quarter cell) are marked, and the undirected graph components of
//! the marked cells give the region of `c`. Exceptional points whose regions
//! share a cell are grouped into one component, so the component count never
//! exceeds `|S|` and regions are pairwise disjoint.

use std::collections::{BTreeSet, VecDeque};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::invariants::{BoundedResult, ClosureOps, Direction, Status};
use crate::pwmap::{ModelError, ModifiedMap};
use crate::ratset::{as_text, ClosedIntervalSet, FinitePointSet, Interval, OpenIntervalSet};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("resolution must be positive, got {delta}")]
    NonPositiveResolution { delta: String },
    #[error("partition needs more than {cap} cells")]
    ComplexityExceeded { cap: usize },
}

/// The cuts `S ∪ {d_0 + kδ}` and the open cells between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPartition<S> {
    cuts: Vec<S>,
    delta: S,
}

impl<S: Scalar> CellPartition<S> {
    pub fn new(model: &ModifiedMap<S>, delta: S, cap: usize) -> Result<Self, GraphError> {
        if !delta.is_positive() {
            return Err(GraphError::NonPositiveResolution {
                delta: delta.to_string(),
            });
        }
        let mut cuts: BTreeSet<S> = model.exceptional().iter().cloned().collect();
        let mut x = model.lower().clone() + delta.clone();
        while &x < model.upper() {
            if cuts.len() > cap {
                return Err(GraphError::ComplexityExceeded { cap });
            }
            cuts.insert(x.clone());
            x = x + delta.clone();
        }
        if cuts.len() - 1 > cap {
            return Err(GraphError::ComplexityExceeded { cap });
        }
        Ok(CellPartition {
            cuts: cuts.into_iter().collect(),
            delta,
        })
    }

    pub fn delta(&self) -> &S {
        &self.delta
    }

    pub fn cuts(&self) -> &[S] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, i: usize) -> Interval<S> {
        Interval::new(self.cuts[i].clone(), self.cuts[i + 1].clone())
    }

    pub fn cells(&self) -> impl Iterator<Item = Interval<S>> + '_ {
        (0..self.len()).map(|i| self.cell(i))
    }

    /// The cell containing `x`; `None` on a cut or outside the domain.
    pub fn cell_of(&self, x: &S) -> Option<usize> {
        match self.cuts.binary_search_by(|c| S::compare(c, x)) {
            Err(i) if i > 0 && i < self.cuts.len() => Some(i - 1),
            _ => None,
        }
    }

    /// Cells overlapping the open interval `(lo, hi)` in positive length.
    pub fn cells_overlapping(&self, lo: &S, hi: &S) -> Range<usize> {
        let n = self.len();
        let start = self.cuts[1..].partition_point(|c| c <= lo);
        let end = self.cuts[..n].partition_point(|c| c < hi);
        start..end.max(start)
    }

    pub fn cells_meeting(&self, set: &OpenIntervalSet<S>) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for iv in set.intervals() {
            for i in self.cells_overlapping(&iv.lo, &iv.hi) {
                if out.last() != Some(&i) {
                    out.push(i);
                }
            }
        }
        out
    }

    /// Cells whose closure lies inside `set`.
    pub fn cells_within(&self, set: &ClosedIntervalSet<S>) -> Vec<usize> {
        let mut out = Vec::new();
        for iv in set.intervals() {
            let start = self.cuts.partition_point(|c| c < &iv.lo);
            let end = self.cuts.partition_point(|c| c <= &iv.hi);
            if end > start + 1 {
                out.extend(start..end - 1);
            }
        }
        out
    }

    /// `⋄` of the union of the given cells, which must be sorted.
    pub fn region(&self, cells: &[usize]) -> OpenIntervalSet<S> {
        let mut out: Vec<Interval<S>> = Vec::new();
        let mut run: Option<(usize, usize)> = None;
        for &i in cells {
            run = match run {
                Some((start, end)) if end + 1 == i => Some((start, i)),
                Some((start, end)) => {
                    out.push(Interval::new(self.cuts[start].clone(), self.cuts[end + 1].clone()));
                    Some((i, i))
                }
                None => Some((i, i)),
            };
        }
        if let Some((start, end)) = run {
            out.push(Interval::new(self.cuts[start].clone(), self.cuts[end + 1].clone()));
        }
        OpenIntervalSet::normalize(out.into_iter().map(|iv| (iv.lo, iv.hi))).expect("cells have positive length")
    }

    /// Cells densely filled by `cloud`: some point strictly inside and no gap
    /// between consecutive points of `{lo} ∪ (cloud ∩ [lo,hi]) ∪ {hi}` above `max_gap`.
    pub fn charged_cells(&self, cloud: &FinitePointSet<S>, max_gap: &S) -> Vec<usize> {
        let candidates: BTreeSet<usize> = cloud.iter().filter_map(|p| self.cell_of(p)).collect();
        candidates
            .into_iter()
            .filter(|&i| {
                let c = self.cell(i);
                &cloud.max_gap_within(&c.lo, &c.hi) <= max_gap
            })
            .collect()
    }
}

/// Cells plus forward edges `c → c'` iff `f(c)` meets `c'`.
#[derive(Debug, Clone)]
pub struct TransitionGraph<S> {
    partition: CellPartition<S>,
    successors: Vec<Range<usize>>,
    predecessors: Vec<Vec<usize>>,
}

impl<S: Scalar> TransitionGraph<S> {
    pub fn build(model: &ModifiedMap<S>, delta: S, cap: usize) -> Result<Self, GraphError> {
        let partition = CellPartition::new(model, delta, cap)?;
        let n = partition.len();
        let mut successors = Vec::with_capacity(n);
        let mut predecessors = vec![Vec::new(); n];
        for i in 0..n {
            let cell = partition.cell(i);
            let k = model.piece_index(&cell.midpoint()).expect("cells lie inside one piece");
            let piece = &model.pieces()[k];
            let y0 = piece.apply(&cell.lo);
            let y1 = piece.apply(&cell.hi);
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            let range = partition.cells_overlapping(&lo, &hi);
            for j in range.clone() {
                predecessors[j].push(i);
            }
            successors.push(range);
        }
        Ok(TransitionGraph {
            partition,
            successors,
            predecessors,
        })
    }

    pub fn partition(&self) -> &CellPartition<S> {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    pub fn successors(&self, i: usize) -> Range<usize> {
        self.successors[i].clone()
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.predecessors[i]
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(|r| r.len()).sum()
    }

    fn search(&self, seeds: &[usize], bound: Option<usize>, undirected: bool) -> (Vec<usize>, bool) {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back((s, 0usize));
            }
        }
        let mut exhausted = true;
        while let Some((v, d)) = queue.pop_front() {
            let forward = self.successors[v].clone();
            let backward = if undirected {
                self.predecessors[v].as_slice()
            } else {
                &[]
            };
            for w in forward.chain(backward.iter().copied()) {
                if seen[w] {
                    continue;
                }
                if bound.is_some_and(|b| d >= b) {
                    exhausted = false;
                    continue;
                }
                seen[w] = true;
                queue.push_back((w, d + 1));
            }
        }
        let cells = seen.iter().enumerate().filter_map(|(i, &s)| s.then_some(i)).collect();
        (cells, exhausted)
    }

    /// Smallest cell set containing `seeds` closed under successors and
    /// predecessors, optionally limited to `bound` hops.
    pub fn grand_orbit_component(&self, seeds: &[usize], bound: Option<usize>) -> Vec<usize> {
        self.search(seeds, bound, true).0
    }

    /// Cells reachable from `seeds` along forward edges within `bound` hops.
    /// The flag is true when the search ran out of new cells before the bound.
    pub fn forward_closure(&self, seeds: &[usize], bound: Option<usize>) -> (Vec<usize>, bool) {
        self.search(seeds, bound, false)
    }

    /// Strongly connected components of the subgraph induced by `nodes`,
    /// each sorted, ordered by first cell.
    pub fn sccs_within(&self, nodes: &[usize]) -> Vec<Vec<usize>> {
        const UNSET: usize = usize::MAX;
        let n = self.len();
        let mut inside = vec![false; n];
        for &v in nodes {
            inside[v] = true;
        }
        let mut index = vec![UNSET; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next = 0usize;
        let mut out = Vec::new();
        for &root in nodes {
            if index[root] != UNSET {
                continue;
            }
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            let mut call = vec![(root, self.successors[root].start)];
            while let Some(&(v, pos)) = call.last() {
                if pos < self.successors[v].end {
                    call.last_mut().expect("nonempty").1 += 1;
                    let w = pos;
                    if !inside[w] {
                        continue;
                    }
                    if index[w] == UNSET {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, self.successors[w].start));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(u, _)) = call.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                }
            }
        }
        out.sort_by_key(|c| c[0]);
        out
    }

    /// SCCs of `nodes` with no edge to another SCC of `nodes`.
    pub fn bottom_sccs_within(&self, nodes: &[usize]) -> Vec<Vec<usize>> {
        let sccs = self.sccs_within(nodes);
        let mut owner = vec![usize::MAX; self.len()];
        for (k, comp) in sccs.iter().enumerate() {
            for &v in comp {
                owner[v] = k;
            }
        }
        sccs.iter()
            .enumerate()
            .filter(|(k, comp)| {
                comp.iter().all(|&v| {
                    self.successors[v]
                        .clone()
                        .all(|w| owner[w] == usize::MAX || owner[w] == *k)
                })
            })
            .map(|(_, comp)| comp.clone())
            .collect()
    }
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", bound = "S: Scalar")]
pub enum Transitivity<S> {
    Supported,
    RefutedAtResolution { witness: OpenIntervalSet<S> },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct TransitivityParams<S> {
    pub samples: usize,
    pub steps: usize,
    #[serde(with = "as_text")]
    pub cover: S,
    pub seed: u64,
}

impl<S: Scalar> TransitivityParams<S> {
    /// 8 orbits of 4096 steps, cover bins of width `4δ`.
    pub fn defaults(delta: &S) -> Self {
        TransitivityParams {
            samples: 8,
            steps: 4096,
            cover: delta.clone() * S::from_int(4),
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct TransitivityReport<S> {
    #[serde(flatten)]
    pub verdict: Transitivity<S>,
    pub scc_count: usize,
    pub cover_bins: usize,
    pub best_orbit_cover: usize,
}

/// Denominator of sampled orbit starts; 2 has large multiplicative order
/// modulo this prime, so dyadic dynamics do not cycle quickly.
const SAMPLE_DENOMINATOR: i64 = 1_000_000_007;

/// Closed bins of width `cover` on the grid `d_0 + k·cover` lying inside
/// `cl(region)`; the region's own closed intervals when no bin fits.
fn cover_bins<S: Scalar>(model: &ModifiedMap<S>, region: &OpenIntervalSet<S>, cover: &S) -> Vec<Interval<S>> {
    let closure = region.closure();
    let mut bins = Vec::new();
    let mut lo = model.lower().clone();
    while &lo < model.upper() {
        let hi = lo.clone() + cover.clone();
        if &hi > model.upper() {
            break;
        }
        let k = closure.intervals().partition_point(|iv| iv.hi < lo);
        if closure.intervals().get(k).is_some_and(|iv| iv.lo <= lo && hi <= iv.hi) {
            bins.push(Interval::new(lo.clone(), hi.clone()));
        }
        lo = hi;
    }
    if bins.is_empty() {
        bins = region.intervals().to_vec();
    }
    bins
}

/// Resolution-scale evidence on whether `region` has a dense forward orbit.
pub fn transitivity<S: Scalar>(
    graph: &TransitionGraph<S>,
    model: &ModifiedMap<S>,
    region: &OpenIntervalSet<S>,
    params: &TransitivityParams<S>,
) -> TransitivityReport<S> {
    let cells = graph.partition().cells_within(&region.closure());
    let sccs = graph.sccs_within(&cells);
    let bins = cover_bins(model, region, &params.cover);
    let mut report = TransitivityReport {
        verdict: Transitivity::Unknown,
        scc_count: sccs.len(),
        cover_bins: bins.len(),
        best_orbit_cover: 0,
    };
    if sccs.len() > 1 {
        let bottom = graph.bottom_sccs_within(&cells);
        let witness = graph.partition().region(&bottom[0]);
        report.verdict = Transitivity::RefutedAtResolution { witness };
        return report;
    }
    if sccs.is_empty() || region.is_empty() {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let denom = S::from_int(SAMPLE_DENOMINATOR);
    for _ in 0..params.samples {
        let iv = &region.intervals()[rng.gen_range(0..region.len())];
        let u = S::from_int(rng.gen_range(1..SAMPLE_DENOMINATOR));
        let mut x = iv.lo.clone() + iv.length() * u / denom.clone();
        let mut hit = vec![false; bins.len()];
        let mut covered = 0usize;
        for _ in 0..=params.steps {
            let k = bins.partition_point(|b| b.hi < x);
            if bins.get(k).is_some_and(|b| b.lo <= x) && !hit[k] {
                hit[k] = true;
                covered += 1;
                if covered == bins.len() {
                    break;
                }
            }
            match model.apply(&x) {
                Ok(Some(y)) => x = y,
                _ => break,
            }
        }
        report.best_orbit_cover = report.best_orbit_cover.max(covered);
        if covered == bins.len() {
            report.verdict = Transitivity::Supported;
            break;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct DecomposeParams<S> {
    pub depth: usize,
    /// Largest gap allowed inside a charged cell; `δ/4` when absent.
    #[serde(skip)]
    pub charge_gap: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transitivity: Option<TransitivityParams<S>>,
}

impl<S: Scalar> DecomposeParams<S> {
    pub fn new(depth: usize) -> Self {
        DecomposeParams {
            depth,
            charge_gap: None,
            transitivity: None,
        }
    }

    pub fn with_transitivity(mut self, params: TransitivityParams<S>) -> Self {
        self.transitivity = Some(params);
        self
    }
}

/// The backward cloud of one exceptional point and the cells it charged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct SeedSummary<S> {
    #[serde(with = "as_text")]
    pub point: S,
    pub cloud_size: usize,
    pub status: Status,
    pub charged_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Component<S> {
    pub witnesses: FinitePointSet<S>,
    pub region: OpenIntervalSet<S>,
    #[serde(skip)]
    pub cells: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transitivity: Option<TransitivityReport<S>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Decomposition<S> {
    #[serde(with = "as_text")]
    pub delta: S,
    pub depth: usize,
    pub cell_count: usize,
    pub sigma: BoundedResult<S>,
    pub zed: BoundedResult<S>,
    pub components: Vec<Component<S>>,
    pub seeds: Vec<SeedSummary<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<S: Scalar> Decomposition<S> {
    /// The weakest status among the seed clouds and the Λ approximation.
    pub fn status(&self) -> Status {
        self.sigma.status.combine(self.zed.status)
    }

    pub fn component_of(&self, x: &S) -> Option<usize> {
        self.components.iter().position(|c| c.region.contains(x))
    }
}

struct Groups {
    parent: Vec<usize>,
}

impl Groups {
    fn new(n: usize) -> Self {
        Groups {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Minimal components seeded from every point of `S`.
pub fn minimal_components<S: Scalar>(
    graph: &TransitionGraph<S>,
    ops: &ClosureOps<'_, S>,
    params: &DecomposeParams<S>,
) -> Decomposition<S> {
    minimal_components_from(graph, ops, params, ops.model().exceptional())
}

/// Minimal components seeded from the given subset of `S`.
pub fn minimal_components_from<S: Scalar>(
    graph: &TransitionGraph<S>,
    ops: &ClosureOps<'_, S>,
    params: &DecomposeParams<S>,
    seeds: &FinitePointSet<S>,
) -> Decomposition<S> {
    let model = ops.model();
    let partition = graph.partition();
    let gap = params
        .charge_gap
        .clone()
        .unwrap_or_else(|| partition.delta().clone() / S::from_int(4));
    let mut summaries = Vec::with_capacity(seeds.len());
    let mut hulls: Vec<(S, Vec<usize>)> = Vec::new();
    let mut cloud_status = Status::Stabilized { at_depth: 0 };
    for c in seeds.iter() {
        let cloud = ops.ninv_points(&FinitePointSet::singleton(c.clone()), params.depth);
        cloud_status = cloud_status.combine(cloud.status);
        let charged = partition.charged_cells(&cloud.points, &gap);
        summaries.push(SeedSummary {
            point: c.clone(),
            cloud_size: cloud.points.len(),
            status: cloud.status,
            charged_cells: charged.len(),
        });
        if !charged.is_empty() {
            hulls.push((c.clone(), graph.grand_orbit_component(&charged, None)));
        }
    }

    let mut groups = Groups::new(hulls.len());
    for a in 0..hulls.len() {
        for b in a + 1..hulls.len() {
            if !intersect_sorted(&hulls[a].1, &hulls[b].1).is_empty() {
                groups.join(a, b);
            }
        }
    }
    let mut components: Vec<Component<S>> = Vec::new();
    for root in 0..hulls.len() {
        if groups.find(root) != root {
            continue;
        }
        let mut witnesses = Vec::new();
        let mut cells = BTreeSet::new();
        for (k, (c, hull)) in hulls.iter().enumerate() {
            if groups.find(k) == root {
                witnesses.push(c.clone());
                cells.extend(hull.iter().copied());
            }
        }
        let cells: Vec<usize> = cells.into_iter().collect();
        let region = partition.region(&cells);
        let transitivity = params
            .transitivity
            .as_ref()
            .map(|t| transitivity(graph, model, &region, t));
        components.push(Component {
            witnesses: witnesses.into_iter().collect(),
            region,
            cells,
            transitivity,
        });
    }
    components.sort_by(|a, b| a.region.intervals()[0].lo.cmp(&b.region.intervals()[0].lo));

    let sigma_set = components
        .iter()
        .fold(OpenIntervalSet::empty(), |acc, c| acc.union(&c.region))
        .diamond();
    let lambda = ops.lambda_s(params.depth);
    let zed_set = lambda.set.intersect(&sigma_set.complement_in(&model.domain_closed()));
    let note = components
        .is_empty()
        .then(|| "no evidence of minimal components: sigma is empty at this depth and resolution".to_string());
    Decomposition {
        delta: partition.delta().clone(),
        depth: params.depth,
        cell_count: partition.len(),
        sigma: BoundedResult {
            set: sigma_set,
            status: cloud_status,
            direction: Direction::UnderApproximation,
        },
        zed: BoundedResult {
            set: zed_set,
            status: lambda.status,
            direction: Direction::OverApproximation,
        },
        components,
        seeds: summaries,
        note,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GermLevel<S> {
    #[serde(with = "as_text")]
    pub radius: S,
    pub hull: OpenIntervalSet<S>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", bound = "S: Scalar")]
pub enum GermVerdict<S> {
    NonDegenerate { region: OpenIntervalSet<S> },
    ShrinksToNowhereDense,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GermReport<S> {
    #[serde(with = "as_text")]
    pub center: S,
    pub levels: Vec<GermLevel<S>>,
    pub verdict: GermVerdict<S>,
}

/// Fully invariant hulls of the balls `B(x, r0·2^-n)`, `n = 0..=levels`,
/// regularized to whole cells and intersected cumulatively.
pub fn germ<S: Scalar>(
    graph: &TransitionGraph<S>,
    ops: &ClosureOps<'_, S>,
    x: &S,
    r0: &S,
    levels: u32,
    depth: usize,
) -> Result<GermReport<S>, ModelError> {
    let model = ops.model();
    if !model.in_domain(x) {
        return Err(ModelError::OutOfDomain {
            point: x.to_string(),
            domain: format!("[{}, {}]", model.lower(), model.upper()),
        });
    }
    let partition = graph.partition();
    let mut out = Vec::new();
    let mut cells: Option<Vec<usize>> = None;
    for n in 0..=levels {
        let radius = r0.clone() * S::dyadic(n);
        let ball = OpenIntervalSet::from_sorted_unchecked(vec![Interval::new(
            x.clone() - radius.clone(),
            x.clone() + radius.clone(),
        )]);
        let hull = ops.inv_open(&ball, depth);
        let within = partition.cells_within(&hull.set.closure());
        let next = match cells {
            Some(prev) => intersect_sorted(&prev, &within),
            None => within,
        };
        out.push(GermLevel {
            radius,
            hull: partition.region(&next),
            status: hull.status,
        });
        cells = Some(next);
    }
    let last = &out[out.len() - 1].hull;
    let verdict = if last.is_empty() {
        GermVerdict::ShrinksToNowhereDense
    } else if out.len() >= 2 && &out[out.len() - 2].hull == last {
        GermVerdict::NonDegenerate { region: last.clone() }
    } else {
        GermVerdict::Unknown
    };
    Ok(GermReport {
        center: x.clone(),
        levels: out,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::DEFAULT_COMPLEXITY_CAP;
    use crate::models;
    use crate::pwmap::PiecewiseAffineMap;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn open(raw: &[(i64, i64, i64, i64)]) -> OpenIntervalSet<Rational> {
        OpenIntervalSet::normalize(raw.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d)))).unwrap()
    }

    fn graph(model: &ModifiedMap<Rational>, delta: Rational) -> TransitionGraph<Rational> {
        TransitionGraph::build(model, delta, DEFAULT_COMPLEXITY_CAP).unwrap()
    }

    fn identity() -> ModifiedMap<Rational> {
        ModifiedMap::new(
            PiecewiseAffineMap::from_pairs(vec![r(0, 1), r(1, 1)], vec![(r(1, 1), r(0, 1))]),
            [],
        )
        .unwrap()
    }

    fn two_tents() -> ModifiedMap<Rational> {
        models::two_component()
    }

    /// Independent edge oracle: sample rational points in each cell, map them,
    /// and record which cells the images land in.
    fn sampled_edges(model: &ModifiedMap<Rational>, g: &TransitionGraph<Rational>) -> Vec<BTreeSet<usize>> {
        let p = g.partition();
        (0..p.len())
            .map(|i| {
                let c = p.cell(i);
                (1..64)
                    .filter_map(|k| {
                        let x = c.lo.clone() + c.length() * r(k, 64);
                        p.cell_of(&model.apply(&x).unwrap().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn tent_quarter_cells() {
        let tent = models::tent();
        let g = graph(&tent, r(1, 4));
        let cells: Vec<_> = g.partition().cells().collect();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1], Interval::new(r(1, 4), r(1, 2)));
        assert_eq!(g.successors(0), 0..2);
        assert_eq!(g.successors(1), 2..4);
        assert_eq!(g.successors(2), 2..4);
        assert_eq!(g.successors(3), 0..2);
        assert_eq!(g.predecessors(2), &[1, 2]);
    }

    #[test]
    fn edges_match_sampled_images() {
        for (model, delta) in [
            (models::tent(), r(1, 16)),
            (models::h_prime(), r(1, 8)),
            (models::two_component(), r(1, 32)),
            (models::contraction(), r(1, 16)),
        ] {
            let g = graph(&model, delta);
            let sampled = sampled_edges(&model, &g);
            for (i, hits) in sampled.iter().enumerate() {
                let exact: BTreeSet<usize> = g.successors(i).collect();
                assert_eq!(&exact, hits, "cell {i}");
            }
        }
    }

    #[test]
    fn coarse_resolution_gives_s_gaps() {
        let model = models::two_component();
        let g = graph(&model, r(2, 1));
        assert_eq!(g.partition().cuts(), model.exceptional().as_slice());
        let id = identity();
        let g = graph(&id, r(1, 2));
        assert_eq!(g.len(), 2);
        assert_eq!(g.successors(0), 0..1);
        assert_eq!(g.successors(1), 1..2);
    }

    #[test]
    fn partition_rejects_bad_resolution() {
        let tent = models::tent::<Rational>();
        assert!(matches!(
            TransitionGraph::build(&tent, r(0, 1), 10),
            Err(GraphError::NonPositiveResolution { .. })
        ));
        assert!(matches!(
            TransitionGraph::build(&tent, r(1, 1024), 100),
            Err(GraphError::ComplexityExceeded { .. })
        ));
    }

    #[test]
    fn grand_orbit_examples() {
        let tent = models::tent();
        let g = graph(&tent, r(1, 4));
        let all = g.grand_orbit_component(&[0], None);
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert_eq!(g.partition().region(&all), open(&[(0, 1, 1, 1)]));
        assert!(g.grand_orbit_component(&[], None).is_empty());
        let model = two_tents();
        let g = graph(&model, r(1, 16));
        let left = g.grand_orbit_component(&[g.partition().cell_of(&r(1, 5)).unwrap()], None);
        assert_eq!(g.partition().region(&left), open(&[(0, 1, 1, 2)]));
    }

    #[test]
    fn sccs_of_two_tents() {
        let model = two_tents();
        let g = graph(&model, r(1, 8));
        let all: Vec<usize> = (0..g.len()).collect();
        let sccs = g.sccs_within(&all);
        assert_eq!(sccs, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(g.bottom_sccs_within(&all).len(), 2);
        let tent = models::tent();
        let g = graph(&tent, r(1, 64));
        let all: Vec<usize> = (0..g.len()).collect();
        assert_eq!(g.sccs_within(&all).len(), 1);
    }

    #[test]
    fn charged_cells_need_dense_points() {
        let tent = models::tent::<Rational>();
        let g = graph(&tent, r(1, 4));
        let cloud: FinitePointSet<Rational> = (1..16).map(|k| r(k, 16)).collect();
        assert_eq!(g.partition().charged_cells(&cloud, &r(1, 16)), vec![0, 1, 2, 3]);
        let sparse: FinitePointSet<Rational> = [r(1, 8), r(5, 8)].into_iter().collect();
        assert!(g.partition().charged_cells(&sparse, &r(1, 16)).is_empty());
    }

    fn decompose(model: &ModifiedMap<Rational>, delta: Rational, depth: usize) -> Decomposition<Rational> {
        let g = graph(model, delta.clone());
        let ops = ClosureOps::new(model, DEFAULT_COMPLEXITY_CAP);
        let params = DecomposeParams::new(depth).with_transitivity(TransitivityParams::defaults(&delta));
        minimal_components(&g, &ops, &params)
    }

    #[test]
    fn tent_has_one_transitive_component() {
        let d = decompose(&models::tent(), r(1, 256), 12);
        assert_eq!(d.components.len(), 1);
        let c = &d.components[0];
        assert_eq!(c.region, open(&[(0, 1, 1, 1)]));
        assert!(c.witnesses.contains(&r(1, 2)));
        assert_eq!(c.transitivity.as_ref().unwrap().verdict, Transitivity::Supported);
        assert_eq!(d.sigma.set, open(&[(0, 1, 1, 1)]));
        assert!(d.zed.set.is_empty());
    }

    #[test]
    fn two_component_splits_at_half() {
        let model = models::two_component();
        let d = decompose(&model, r(1, 256), 12);
        let regions: Vec<_> = d.components.iter().map(|c| c.region.clone()).collect();
        assert_eq!(regions, vec![open(&[(0, 1, 1, 2)]), open(&[(1, 2, 1, 1)])]);
        assert!(regions.len() <= model.exceptional().len());
        for c in &d.components {
            assert_eq!(c.transitivity.as_ref().unwrap().verdict, Transitivity::Supported);
        }
        assert!(d.zed.set.is_empty());
    }

    #[test]
    fn h_prime_single_component() {
        let d = decompose(&models::h_prime(), r(1, 64), 12);
        assert_eq!(d.components.len(), 1);
        let w = &d.components[0].witnesses;
        for c in [r(1, 2), r(3, 2), r(5, 2)] {
            assert!(w.contains(&c));
        }
        assert_eq!(d.components[0].region, open(&[(0, 1, 3, 1)]));
    }

    #[test]
    fn contraction_has_no_components() {
        let model = models::contraction();
        for depth in [4, 8, 12] {
            let d = decompose(&model, r(1, 256), depth);
            assert!(d.components.is_empty());
            assert!(d.sigma.set.is_empty());
            assert!(d.note.is_some());
            assert_eq!(d.zed.set, open(&[(0, 1, 1, 1)]));
        }
    }

    #[test]
    fn reseeding_from_witnesses_reproduces_regions() {
        for model in [models::tent(), models::two_component(), models::h_prime()] {
            let delta = model.domain_length() / r(128, 1);
            let d = decompose(&model, delta.clone(), 12);
            let g = graph(&model, delta);
            let ops = ClosureOps::new(&model, DEFAULT_COMPLEXITY_CAP);
            for c in &d.components {
                let again = minimal_components_from(&g, &ops, &DecomposeParams::new(12), &c.witnesses);
                assert_eq!(again.components.len(), 1);
                assert_eq!(again.components[0].region, c.region);
            }
        }
    }

    #[test]
    fn transitivity_refutes_merged_region() {
        let model = two_tents();
        let g = graph(&model, r(1, 64));
        let params = TransitivityParams::defaults(&r(1, 64));
        let report = transitivity(&g, &model, &open(&[(0, 1, 1, 1)]), &params);
        assert_eq!(
            report.verdict,
            Transitivity::RefutedAtResolution {
                witness: open(&[(0, 1, 1, 2)])
            }
        );
        assert_eq!(report.scc_count, 2);
    }

    #[test]
    fn transitivity_single_identity_cell() {
        let id = identity();
        let g = graph(&id, r(1, 2));
        let params = TransitivityParams::defaults(&r(1, 2));
        let report = transitivity(&g, &id, &open(&[(0, 1, 1, 2)]), &params);
        assert_eq!(report.verdict, Transitivity::Supported);
    }

    #[test]
    fn germ_examples() {
        let tent = models::tent();
        let g = graph(&tent, r(1, 256));
        let ops = ClosureOps::new(&tent, DEFAULT_COMPLEXITY_CAP);
        let report = germ(&g, &ops, &r(2, 5), &r(1, 4), 4, 12).unwrap();
        assert_eq!(
            report.verdict,
            GermVerdict::NonDegenerate {
                region: open(&[(0, 1, 1, 1)])
            }
        );
        let model = models::two_component();
        let g = graph(&model, r(1, 256));
        let ops = ClosureOps::new(&model, DEFAULT_COMPLEXITY_CAP);
        let report = germ(&g, &ops, &r(3, 4), &r(1, 8), 4, 12).unwrap();
        assert_eq!(
            report.verdict,
            GermVerdict::NonDegenerate {
                region: open(&[(1, 2, 1, 1)])
            }
        );
        let model = models::contraction();
        let g = graph(&model, r(1, 256));
        let ops = ClosureOps::new(&model, DEFAULT_COMPLEXITY_CAP);
        let report = germ(&g, &ops, &r(1, 8), &r(1, 16), 6, 12).unwrap();
        assert_eq!(report.verdict, GermVerdict::ShrinksToNowhereDense);
        let hulls: Vec<_> = report.levels.iter().map(|l| l.hull.clone()).collect();
        assert!(hulls.windows(2).all(|w| w[1].is_subset(&w[0])));
        assert!(germ(&g, &ops, &r(2, 1), &r(1, 16), 1, 2).is_err());
    }

    #[test]
    fn witness_grouping_stable_under_refinement() {
        for model in [models::tent(), models::two_component(), models::h_prime()] {
            let coarse = decompose(&model, model.domain_length() / r(64, 1), 12);
            let fine = decompose(&model, model.domain_length() / r(128, 1), 12);
            let a: Vec<_> = coarse.components.iter().map(|c| c.witnesses.clone()).collect();
            let b: Vec<_> = fine.components.iter().map(|c| c.witnesses.clone()).collect();
            assert_eq!(a, b);
        }
    }
}
