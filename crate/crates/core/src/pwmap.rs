//! Piecewise affine maps of a compact interval and their modification by an
//! exceptional set.
//!
//! A [`PiecewiseAffineMap`] is the raw map `g`: breakpoints
//! `d_0 < d_1 < … < d_{p+1}` and one affine piece per open gap. Its value at a
//! breakpoint is never modelled. A [`ModifiedMap`] pairs `g` with a finite
//! exceptional set `S ⊇ {d_k}` and behaves as the map `f` that agrees with `g`
//! off `S` and sends `S` (and the cemetery state [`OrbitPoint::Bullet`]) to
//! the cemetery.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratset::{ClosedIntervalSet, FinitePointSet, Interval, OpenIntervalSet};
use crate::scalar::parse_scalar;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a map needs at least two breakpoints, got {count}")]
    TooFewBreakpoints { count: usize },
    #[error("breakpoints must be strictly increasing (position {index})")]
    BreakpointsNotIncreasing { index: usize },
    #[error("{breakpoints} breakpoints need {expected} pieces, got {pieces}")]
    PieceCountMismatch {
        breakpoints: usize,
        expected: usize,
        pieces: usize,
    },
    #[error("piece {index} has slope 0 and is not strictly monotone")]
    NonMonotonePiece { index: usize },
    #[error("piece {index} maps onto {image}, which leaves the domain {domain}")]
    EscapesDomain {
        index: usize,
        image: String,
        domain: String,
    },
    #[error("exceptional set is missing breakpoint {point}")]
    SMissingBreakpoint { point: String },
    #[error("exceptional point {point} lies outside the domain {domain}")]
    ExceptionalOutsideDomain { point: String, domain: String },
    #[error("point {point} lies outside the domain {domain}")]
    OutOfDomain { point: String, domain: String },
    #[error("{0}")]
    Parse(String),
}

impl ModelError {
    /// Stable machine-readable name of the violated invariant.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::TooFewBreakpoints { .. } => "TooFewBreakpoints",
            ModelError::BreakpointsNotIncreasing { .. } => "BreakpointsNotIncreasing",
            ModelError::PieceCountMismatch { .. } => "PieceCountMismatch",
            ModelError::NonMonotonePiece { .. } => "NonMonotonePiece",
            ModelError::EscapesDomain { .. } => "EscapesDomain",
            ModelError::SMissingBreakpoint { .. } => "SMissingBreakpoint",
            ModelError::ExceptionalOutsideDomain { .. } => "ExceptionalOutsideDomain",
            ModelError::OutOfDomain { .. } => "OutOfDomain",
            ModelError::Parse(_) => "Parse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffinePiece<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> AffinePiece<S> {
    pub fn new(slope: S, intercept: S) -> Self {
        AffinePiece { slope, intercept }
    }

    pub fn apply(&self, x: &S) -> S {
        S::affine(&self.slope, x, &self.intercept)
    }

    /// The unique `x` with `apply(x) == y`; slope must be nonzero.
    pub fn solve(&self, y: &S) -> S {
        (y.clone() - self.intercept.clone()) / self.slope.clone()
    }
}

/// The raw map `g`, unvalidated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseAffineMap<S> {
    pub breakpoints: Vec<S>,
    pub pieces: Vec<AffinePiece<S>>,
}

impl<S: Scalar> PiecewiseAffineMap<S> {
    pub fn new(breakpoints: Vec<S>, pieces: Vec<AffinePiece<S>>) -> Self {
        PiecewiseAffineMap { breakpoints, pieces }
    }

    /// Convenience constructor from `(slope, intercept)` pairs.
    pub fn from_pairs(breakpoints: Vec<S>, pieces: Vec<(S, S)>) -> Self {
        Self::new(
            breakpoints,
            pieces.into_iter().map(|(s, b)| AffinePiece::new(s, b)).collect(),
        )
    }
}

/// A finite exceptional set; must contain every breakpoint of the map it is
/// paired with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalSet<S>(pub FinitePointSet<S>);

/// A point of `X ∪ {•}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitPoint<S> {
    Point(S),
    Bullet,
}

impl<S> OrbitPoint<S> {
    pub fn as_point(&self) -> Option<&S> {
        match self {
            OrbitPoint::Point(x) => Some(x),
            OrbitPoint::Bullet => None,
        }
    }

    pub fn is_bullet(&self) -> bool {
        matches!(self, OrbitPoint::Bullet)
    }
}

impl<S: fmt::Display> fmt::Display for OrbitPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitPoint::Point(x) => write!(f, "{x}"),
            OrbitPoint::Bullet => f.write_str("•"),
        }
    }
}

impl<S: fmt::Display> Serialize for OrbitPoint<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// The modified map `f`, validated, with piece images precomputed.
#[derive(Debug, Clone)]
pub struct ModifiedMap<S> {
    breakpoints: Vec<S>,
    pieces: Vec<AffinePiece<S>>,
    exceptional: FinitePointSet<S>,
    /// Exceptional points that are not breakpoints.
    interior_exceptional: FinitePointSet<S>,
    images: Vec<Interval<S>>,
}

impl<S: Scalar> ModifiedMap<S> {
    /// Validates `map` with `S = breakpoints ∪ extra`.
    pub fn new(map: PiecewiseAffineMap<S>, extra: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let exceptional: FinitePointSet<S> = map.breakpoints.iter().cloned().chain(extra).collect();
        Self::with_exceptional(map, ExceptionalSet(exceptional))
    }

    /// Validates `map` against an explicitly given exceptional set.
    pub fn with_exceptional(map: PiecewiseAffineMap<S>, exceptional: ExceptionalSet<S>) -> Result<Self, ModelError> {
        let PiecewiseAffineMap { breakpoints, pieces } = map;
        if breakpoints.len() < 2 {
            return Err(ModelError::TooFewBreakpoints {
                count: breakpoints.len(),
            });
        }
        if let Some(index) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ModelError::BreakpointsNotIncreasing { index: index + 1 });
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(ModelError::PieceCountMismatch {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() - 1,
                pieces: pieces.len(),
            });
        }
        if let Some(index) = pieces.iter().position(|p| p.slope.is_zero()) {
            return Err(ModelError::NonMonotonePiece { index });
        }
        let a = &breakpoints[0];
        let b = &breakpoints[breakpoints.len() - 1];
        let domain_text = format!("[{a}, {b}]");
        let mut images = Vec::with_capacity(pieces.len());
        for (index, piece) in pieces.iter().enumerate() {
            let y0 = piece.apply(&breakpoints[index]);
            let y1 = piece.apply(&breakpoints[index + 1]);
            let image = if y0 < y1 {
                Interval::new(y0, y1)
            } else {
                Interval::new(y1, y0)
            };
            if &image.lo < a || &image.hi > b {
                return Err(ModelError::EscapesDomain {
                    index,
                    image: image.to_string(),
                    domain: domain_text,
                });
            }
            images.push(image);
        }
        let exceptional = exceptional.0;
        if let Some(p) = breakpoints.iter().find(|d| !exceptional.contains(d)) {
            return Err(ModelError::SMissingBreakpoint { point: p.to_string() });
        }
        if let Some(p) = exceptional.iter().find(|p| *p < a || *p > b) {
            return Err(ModelError::ExceptionalOutsideDomain {
                point: p.to_string(),
                domain: domain_text,
            });
        }
        let interior_exceptional = exceptional
            .iter()
            .filter(|p| breakpoints.binary_search(p).is_err())
            .cloned()
            .collect();
        Ok(ModifiedMap {
            breakpoints,
            pieces,
            exceptional,
            interior_exceptional,
            images,
        })
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[AffinePiece<S>] {
        &self.pieces
    }

    /// Open image of each piece's open interval.
    pub fn piece_images(&self) -> &[Interval<S>] {
        &self.images
    }

    pub fn piece_interval(&self, k: usize) -> Interval<S> {
        Interval::new(self.breakpoints[k].clone(), self.breakpoints[k + 1].clone())
    }

    pub fn exceptional(&self) -> &FinitePointSet<S> {
        &self.exceptional
    }

    pub fn lower(&self) -> &S {
        &self.breakpoints[0]
    }

    pub fn upper(&self) -> &S {
        &self.breakpoints[self.breakpoints.len() - 1]
    }

    pub fn domain(&self) -> Interval<S> {
        Interval::new(self.lower().clone(), self.upper().clone())
    }

    pub fn domain_length(&self) -> S {
        self.upper().clone() - self.lower().clone()
    }

    pub fn domain_closed(&self) -> ClosedIntervalSet<S> {
        ClosedIntervalSet::merge(vec![self.domain()])
    }

    pub fn domain_interior(&self) -> OpenIntervalSet<S> {
        OpenIntervalSet::from_sorted_unchecked(vec![self.domain()])
    }

    pub fn in_domain(&self, x: &S) -> bool {
        S::compare(self.lower(), x).is_le() && S::compare(x, self.upper()).is_le()
    }

    fn out_of_domain(&self, x: &S) -> ModelError {
        ModelError::OutOfDomain {
            point: x.to_string(),
            domain: format!("[{}, {}]", self.lower(), self.upper()),
        }
    }

    /// Index of the piece whose open interval contains `x`; `None` on a breakpoint
    /// or outside the domain.
    pub fn piece_index(&self, x: &S) -> Option<usize> {
        match self.breakpoints.binary_search_by(|b| S::compare(b, x)) {
            Ok(_) => None,
            Err(0) => None,
            Err(i) if i == self.breakpoints.len() => None,
            Err(i) => Some(i - 1),
        }
    }

    /// `f(x)` for `x ∈ X`: `None` stands for `•`.
    pub fn apply(&self, x: &S) -> Result<Option<S>, ModelError> {
        if !self.in_domain(x) {
            return Err(self.out_of_domain(x));
        }
        if self.exceptional.contains(x) {
            return Ok(None);
        }
        let k = self.piece_index(x).expect("points off S lie inside a piece");
        Ok(Some(self.pieces[k].apply(x)))
    }

    pub fn eval(&self, x: &OrbitPoint<S>) -> Result<OrbitPoint<S>, ModelError> {
        match x {
            OrbitPoint::Bullet => Ok(OrbitPoint::Bullet),
            OrbitPoint::Point(x) => Ok(self.apply(x)?.map_or(OrbitPoint::Bullet, OrbitPoint::Point)),
        }
    }

    /// `x, f(x), …, f^n(x)`.
    pub fn forward_orbit(&self, x: &S, n: usize) -> Result<Vec<OrbitPoint<S>>, ModelError> {
        if !self.in_domain(x) {
            return Err(self.out_of_domain(x));
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut current = OrbitPoint::Point(x.clone());
        out.push(current.clone());
        for _ in 0..n {
            current = self.eval(&current)?;
            out.push(current.clone());
        }
        Ok(out)
    }

    /// `f(O \ S)`, computed by splitting `O` at every point of `S` and mapping
    /// each fragment through its affine piece.
    pub fn image_mod(&self, set: &OpenIntervalSet<S>) -> OpenIntervalSet<S> {
        let clipped = set.clip(self.lower(), self.upper());
        let fragments = clipped.remove_points(&self.exceptional);
        let mut images = Vec::with_capacity(fragments.len());
        for frag in fragments.intervals() {
            let k = self.piece_index(&frag.midpoint()).expect("fragments avoid breakpoints");
            let piece = &self.pieces[k];
            let y0 = piece.apply(&frag.lo);
            let y1 = piece.apply(&frag.hi);
            images.push(if y0 < y1 {
                Interval::new(y0, y1)
            } else {
                Interval::new(y1, y0)
            });
        }
        OpenIntervalSet::merge(images)
    }

    /// `f⁻¹(O)`: open and disjoint from `S`.
    pub fn preimage(&self, set: &OpenIntervalSet<S>) -> OpenIntervalSet<S> {
        let targets = set.intervals();
        let mut out = Vec::new();
        for (k, piece) in self.pieces.iter().enumerate() {
            let image = &self.images[k];
            let start = targets.partition_point(|iv| iv.hi <= image.lo);
            for target in &targets[start..] {
                if target.lo >= image.hi {
                    break;
                }
                let Some(hit) = target.overlap(image) else {
                    continue;
                };
                let x0 = piece.solve(&hit.lo);
                let x1 = piece.solve(&hit.hi);
                out.push(if x0 < x1 {
                    Interval::new(x0, x1)
                } else {
                    Interval::new(x1, x0)
                });
            }
        }
        let merged = OpenIntervalSet::merge(out);
        if self.interior_exceptional.is_empty() {
            merged
        } else {
            merged.remove_points(&self.interior_exceptional)
        }
    }

    /// All `x ∈ X \ S` with `f(x) = y`; at most one per piece.
    pub fn preimage_points(&self, y: &S) -> FinitePointSet<S> {
        let mut out = Vec::new();
        for (k, piece) in self.pieces.iter().enumerate() {
            if !self.images[k].contains_open(y) {
                continue;
            }
            let x = piece.solve(y);
            if !self.interior_exceptional.contains(&x) {
                out.push(x);
            }
        }
        out.into_iter().collect()
    }
}

/// On-disk map description: rationals as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub breakpoints: Vec<String>,
    pub pieces: Vec<PieceConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_exceptional: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub slope: String,
    pub intercept: String,
}

impl MapConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(format!("invalid map config: {e}")))
    }

    pub fn to_model<S: Scalar>(&self) -> Result<ModifiedMap<S>, ModelError> {
        let parse = |t: &String| parse_scalar::<S>(t).map_err(ModelError::Parse);
        let breakpoints = self.breakpoints.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| Ok(AffinePiece::new(parse(&p.slope)?, parse(&p.intercept)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let extra = self
            .extra_exceptional
            .iter()
            .map(parse)
            .collect::<Result<Vec<_>, _>>()?;
        ModifiedMap::new(PiecewiseAffineMap::new(breakpoints, pieces), extra)
    }

    pub fn from_model<S: Scalar>(model: &ModifiedMap<S>) -> Self {
        MapConfig {
            breakpoints: model.breakpoints().iter().map(|d| d.to_string()).collect(),
            pieces: model
                .pieces()
                .iter()
                .map(|p| PieceConfig {
                    slope: p.slope.to_string(),
                    intercept: p.intercept.to_string(),
                })
                .collect(),
            extra_exceptional: model.interior_exceptional.iter().map(|p| p.to_string()).collect(),
        }
    }
}
