//! End-to-end runs and their serialized outputs.

use serde::Serialize;

use crate::cascade::{build_cascade, Cascade, CoreReport};
use crate::cellgraph::{minimal_components, DecomposeParams, Decomposition, TransitionGraph, TransitivityParams};
use crate::invariants::{ClosureOps, Status};
use crate::oracle::{self, GapStatistics, OracleVerdict};
use crate::pwmap::{MapConfig, ModifiedMap};
use crate::ratset::as_text;
use crate::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct RunParams<S> {
    #[serde(with = "as_text")]
    pub delta: S,
    pub depth: usize,
    pub cascade_m: usize,
    /// Forward saturation bound, in graph hops, for every cascade stage.
    pub stages: usize,
    pub grid: usize,
    pub steps: usize,
    pub complexity_cap: usize,
    pub transitivity: TransitivityParams<S>,
}

impl<S: Scalar> RunParams<S> {
    /// `δ = L/1024`, depth 12, 4 cascade stages saturated for 64 hops,
    /// oracle grid 1000 with 500 steps.
    pub fn defaults(model: &ModifiedMap<S>, complexity_cap: usize) -> Self {
        Self::with_delta(model.domain_length() / S::from_int(1024), complexity_cap)
    }

    pub fn with_delta(delta: S, complexity_cap: usize) -> Self {
        RunParams {
            transitivity: TransitivityParams::defaults(&delta),
            delta,
            depth: 12,
            cascade_m: 4,
            stages: 64,
            grid: 1000,
            steps: 500,
            complexity_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl ErrorInfo {
    pub fn new(kind: &str, message: impl ToString) -> Self {
        ErrorInfo {
            kind: kind.to_string(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct CascadeSummary<S> {
    pub component: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cascade: Option<Cascade<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<CoreReport<S>>,
    pub domain_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct OracleSummary<S> {
    #[serde(flatten)]
    pub verdict: OracleVerdict<S>,
    /// Gaps of the backward cloud of `S` at the run depth.
    pub cloud_gaps: GapStatistics<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Report<S> {
    pub schema_version: u32,
    pub map: MapConfig,
    pub params: RunParams<S>,
    pub status: Status,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition<S>>,
    pub cascades: Vec<CascadeSummary<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl<S: Scalar> Report<S> {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

/// Everything `decompose` computes: components with transitivity verdicts,
/// a cascade per component, and the oracle check.
pub fn decompose<S: Scalar>(model: &ModifiedMap<S>, params: &RunParams<S>) -> Report<S> {
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        map: MapConfig::from_model(model),
        params: params.clone(),
        status: Status::Stabilized { at_depth: 0 },
        complete: false,
        decomposition: None,
        cascades: Vec::new(),
        oracle: None,
        error: None,
    };
    let graph = match TransitionGraph::build(model, params.delta.clone(), params.complexity_cap) {
        Ok(g) => g,
        Err(e) => {
            report.status = Status::ComplexityExceeded { depth: 0 };
            report.error = Some(ErrorInfo::new("ComplexityExceeded", e));
            return report;
        }
    };
    let ops = ClosureOps::new(model, params.complexity_cap);
    let decomp_params = DecomposeParams::new(params.depth).with_transitivity(params.transitivity.clone());
    let decomp = minimal_components(&graph, &ops, &decomp_params);
    report.status = decomp.status();

    for (k, component) in decomp.components.iter().enumerate() {
        let summary = match build_cascade(&graph, component, params.cascade_m, params.stages) {
            Ok(c) => {
                let domain = c.domain(&graph);
                CascadeSummary {
                    component: k,
                    core: Some(c.core(c.stages.len())),
                    domain_matches: domain.is_ok(),
                    error: domain.err().map(|e| ErrorInfo::new(e.kind(), &e)),
                    cascade: Some(c),
                }
            }
            Err(e) => CascadeSummary {
                component: k,
                cascade: None,
                core: None,
                domain_matches: false,
                error: Some(ErrorInfo::new(e.kind(), &e)),
            },
        };
        report.cascades.push(summary);
    }

    let samples = oracle::sweep(model, Some(graph.partition()), params.grid, params.steps);
    let cloud = ops.ninv_points(model.exceptional(), params.depth);
    report.oracle = Some(OracleSummary {
        verdict: oracle::validate(model, &decomp, &samples),
        cloud_gaps: oracle::gap_statistics(&cloud.points, model.lower(), model.upper()),
    });
    report.complete = !report.status.is_complexity_exceeded();
    if !report.complete {
        report.error = Some(ErrorInfo::new(
            "ComplexityExceeded",
            format!("complexity cap {} reached; results are partial", params.complexity_cap),
        ));
    }
    report.decomposition = Some(decomp);
    report
}

/// `x,fx` at the left limit, midpoint and right limit of every cell.
pub fn cobweb_csv<S: Scalar>(model: &ModifiedMap<S>, graph: &TransitionGraph<S>) -> String {
    let mut out = String::from("x,fx\n");
    for cell in graph.partition().cells() {
        let k = model.piece_index(&cell.midpoint()).expect("cells lie inside one piece");
        let piece = &model.pieces()[k];
        for x in [cell.lo.clone(), cell.midpoint(), cell.hi.clone()] {
            out.push_str(&format!("{},{}\n", x, piece.apply(&x)));
        }
    }
    out
}

/// `lo,hi,label` for every interval of every component, then of the Λ interior.
pub fn regions_csv<S: Scalar>(decomp: &Decomposition<S>) -> String {
    let mut out = String::from("lo,hi,label\n");
    for (label, region) in oracle::pieces(decomp) {
        for iv in region.intervals() {
            out.push_str(&format!("{},{},{}\n", iv.lo, iv.hi, label));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::DEFAULT_COMPLEXITY_CAP;
    use crate::models;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn tent_report() {
        let tent = models::tent::<Rational>();
        let mut params = RunParams::with_delta(r(1, 128), DEFAULT_COMPLEXITY_CAP);
        params.grid = 100;
        let report = decompose(&tent, &params);
        assert!(report.complete);
        let d = report.decomposition.as_ref().unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(report.oracle.as_ref().unwrap().verdict.agreement, 1.0);
        assert!(report.cascades[0].domain_matches);
        assert_eq!(regions_csv(d), "lo,hi,label\n0,1,component_0\n");
        let json = report.to_json();
        assert!(json.starts_with("{\n  \"schema_version\": 1,"));
        assert_eq!(json, decompose(&tent, &params).to_json());
    }

    #[test]
    fn contraction_report_has_note() {
        let model = models::contraction::<Rational>();
        let mut params = RunParams::with_delta(r(1, 64), DEFAULT_COMPLEXITY_CAP);
        params.grid = 50;
        let report = decompose(&model, &params);
        let d = report.decomposition.unwrap();
        assert!(d.components.is_empty());
        assert!(d.note.is_some());
        assert!(report.cascades.is_empty());
        assert_eq!(regions_csv(&d), "lo,hi,label\n0,1,zed\n");
    }

    #[test]
    fn cap_hit_is_partial() {
        let tent = models::tent::<Rational>();
        let params = RunParams::with_delta(r(1, 1024), 100);
        let report = decompose(&tent, &params);
        assert!(!report.complete);
        assert!(report.decomposition.is_none());
        assert_eq!(report.error.unwrap().kind, "ComplexityExceeded");

        let mut params = RunParams::with_delta(r(1, 16), 40);
        params.grid = 10;
        let report = decompose(&tent, &params);
        assert!(!report.complete);
        assert!(report.decomposition.is_some());
        assert!(report.status.is_complexity_exceeded());
    }

    #[test]
    fn cobweb_rows() {
        let tent = models::tent::<Rational>();
        let g = TransitionGraph::build(&tent, r(1, 4), 100).unwrap();
        let csv = cobweb_csv(&tent, &g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * 4);
        assert_eq!(lines[1], "0,0");
        assert_eq!(lines[2], "1/8,1/4");
        assert_eq!(lines[12], "1,0");
    }
}
