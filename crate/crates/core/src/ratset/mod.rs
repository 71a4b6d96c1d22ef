//! Finite unions of rational intervals and the regular open set algebra.
//!
//! Three carriers live here:
//!
//! * [`OpenIntervalSet`]: a finite union of open intervals in canonical form.
//!   Intervals are sorted and pairwise disjoint, but two consecutive intervals
//!   may touch (`(0,1) ∪ (1,2)`), which is how open sets that are not regular
//!   open are represented. Regularity is the predicate `diamond(O) == O`.
//! * [`ClosedIntervalSet`]: a finite union of closed intervals (possibly
//!   degenerate points) separated by positive gaps.
//! * [`FinitePointSet`]: a strictly increasing list of points.
//!
//! All three canonical forms are unique for the point set they denote, so
//! structural equality is set equality.

mod closed;
mod open;
mod points;
mod serde_impl;

pub use closed::ClosedIntervalSet;
pub use open::OpenIntervalSet;
pub use points::FinitePointSet;
pub use serde_impl::as_text;

use std::fmt;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("open interval ({lo}, {hi}) is empty: need lo < hi")]
    EmptyOpenInterval { lo: String, hi: String },
    #[error("closed interval [{lo}, {hi}] is empty: need lo <= hi")]
    EmptyClosedInterval { lo: String, hi: String },
    #[error("{0}")]
    Parse(String),
}

/// A pair of endpoints. Whether it denotes an open or a closed interval is
/// decided by the set type holding it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> S {
        S::midpoint(&self.lo, &self.hi)
    }

    /// Strict containment, i.e. membership in the open interval.
    pub fn contains_open(&self, x: &S) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn contains_closed(&self, x: &S) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Positive-length overlap of the two open intervals.
    pub fn overlap(&self, other: &Self) -> Option<Self> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl<S: fmt::Display> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}
