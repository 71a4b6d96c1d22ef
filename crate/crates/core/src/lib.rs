//! Invariant decompositions of piecewise affine interval maps.
//!
//! A map `g` of `[a, b]` is given by breakpoints and affine pieces. Points of
//! a finite exceptional set `S` (containing every breakpoint) are sent to an
//! absorbing cemetery state, which yields the modified map `f`. The crate
//! computes, at a chosen resolution and depth:
//!
//! * the regular open hull `Σ` of the grand orbit of `S` and the interior `Z`
//!   of the set of points whose orbits never meet `S`,
//! * the minimal fully invariant regular open components inside `Σ`, each
//!   tagged with the points of `S` that generate it,
//! * transitivity evidence, cascades, cores and germs,
//!
//! and validates the result against exact orbit sweeps.
//!
//! All arithmetic is exact. The code is generic over [`Scalar`], which is
//! implemented for every `num_rational::Ratio<T>` with a signed integer `T`;
//! [`Rational`] (arbitrary precision) is the default.

pub mod cascade;
pub mod cellgraph;
pub mod invariants;
pub mod models;
pub mod oracle;
pub mod pwmap;
pub mod ratset;
pub mod report;
pub mod scalar;

pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;

pub type OpenSet = ratset::OpenIntervalSet<Rational>;
pub type ClosedSet = ratset::ClosedIntervalSet<Rational>;
pub type PointSet = ratset::FinitePointSet<Rational>;
pub type Model = pwmap::ModifiedMap<Rational>;
pub type Graph = cellgraph::TransitionGraph<Rational>;
pub type RationalDecomposition = cellgraph::Decomposition<Rational>;
pub type RationalReport = report::Report<Rational>;
