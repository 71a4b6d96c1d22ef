use std::fmt;

use super::{ClosedIntervalSet, FinitePointSet, Interval, SetError};
use crate::Scalar;

/// A finite union of open intervals in canonical form.
///
/// Intervals are sorted with `lo < hi` and `hi_i <= lo_{i+1}`. Touching
/// neighbours (`hi_i == lo_{i+1}`) are legal: the shared point is missing
/// from the set, so the union is open but not regular open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenIntervalSet<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: Scalar> Default for OpenIntervalSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> OpenIntervalSet<S> {
    pub fn empty() -> Self {
        OpenIntervalSet { intervals: Vec::new() }
    }

    pub fn interval(lo: S, hi: S) -> Result<Self, SetError> {
        Self::normalize([(lo, hi)])
    }

    /// Canonical form of a union of open intervals.
    ///
    /// Overlapping inputs are merged; inputs that merely touch stay separate,
    /// because their union does not contain the shared endpoint.
    pub fn normalize<I>(raw: I) -> Result<Self, SetError>
    where
        I: IntoIterator<Item = (S, S)>,
    {
        let mut items = Vec::new();
        for (lo, hi) in raw {
            if lo >= hi {
                return Err(SetError::EmptyOpenInterval {
                    lo: lo.to_string(),
                    hi: hi.to_string(),
                });
            }
            items.push(Interval { lo, hi });
        }
        Ok(Self::merge(items))
    }

    /// Normalizes intervals already known to satisfy `lo < hi`.
    pub(crate) fn merge(mut items: Vec<Interval<S>>) -> Self {
        debug_assert!(items.iter().all(|iv| iv.lo < iv.hi));
        items.sort();
        let mut out: Vec<Interval<S>> = Vec::with_capacity(items.len());
        for iv in items {
            match out.last_mut() {
                Some(last) if iv.lo < last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        OpenIntervalSet { intervals: out }
    }

    pub(crate) fn from_sorted_unchecked(intervals: Vec<Interval<S>>) -> Self {
        debug_assert!(intervals.iter().all(|iv| iv.lo < iv.hi));
        debug_assert!(intervals.windows(2).all(|w| w[0].hi <= w[1].lo));
        OpenIntervalSet { intervals }
    }

    pub fn intervals(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of connected components.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: &S) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.hi <= x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains_open(x))
    }

    pub fn total_length(&self) -> S {
        self.intervals.iter().fold(S::zero(), |acc, iv| acc + iv.length())
    }

    pub fn closure(&self) -> ClosedIntervalSet<S> {
        ClosedIntervalSet::merge(self.intervals.clone())
    }

    /// `int(cl(O))`: fills every isolated missing point.
    pub fn diamond(&self) -> Self {
        self.closure().interior()
    }

    pub fn is_regular(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].hi < w[1].lo)
    }

    /// `cl(O) \ O`, i.e. every endpoint of every component.
    pub fn boundary(&self) -> FinitePointSet<S> {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lo.clone(), iv.hi.clone()])
            .collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::merge(self.intervals.iter().chain(other.intervals.iter()).cloned().collect())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if let Some(piece) = a.overlap(b) {
                out.push(piece);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_sorted_unchecked(out)
    }

    /// True iff the intersection has positive length. Touching is not meeting.
    pub fn meets(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if a.lo < b.hi && b.lo < a.hi {
                return true;
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        &self.intersect(other) == self
    }

    /// `O \ F` for a closed set `F`; the result is open.
    pub fn minus_closed(&self, removed: &ClosedIntervalSet<S>) -> Self {
        let cuts = removed.intervals();
        let mut out = Vec::new();
        for iv in &self.intervals {
            let mut cursor = iv.lo.clone();
            let start = cuts.partition_point(|c| c.hi <= iv.lo);
            for c in &cuts[start..] {
                if c.lo >= iv.hi {
                    break;
                }
                if cursor < c.lo {
                    out.push(Interval::new(cursor.clone(), c.lo.clone()));
                }
                if c.hi > cursor {
                    cursor = c.hi.clone();
                }
            }
            if cursor < iv.hi {
                out.push(Interval::new(cursor, iv.hi.clone()));
            }
        }
        Self::from_sorted_unchecked(out)
    }

    pub fn remove_points(&self, points: &FinitePointSet<S>) -> Self {
        self.minus_closed(&ClosedIntervalSet::from_points(points))
    }

    /// `X \ cl(O)` taken inside the closed domain `X`; returns its interior,
    /// which is regular open.
    pub fn complement_in(&self, domain: &ClosedIntervalSet<S>) -> Self {
        domain.interior().minus_closed(&self.closure())
    }

    /// `self \ cl(other)`.
    pub fn regular_difference(&self, other: &Self) -> Self {
        self.minus_closed(&other.closure())
    }

    /// Restriction to the open interval `(lo, hi)`.
    pub fn clip(&self, lo: &S, hi: &S) -> Self {
        if lo >= hi {
            return Self::empty();
        }
        self.intersect(&OpenIntervalSet {
            intervals: vec![Interval::new(lo.clone(), hi.clone())],
        })
    }

    /// The finite set `outer \ self` when `self ⊆ outer` and the difference has
    /// no interior; `None` if some positive-length part of `outer` is missed.
    pub fn missing_points_of(&self, outer: &Self) -> Option<FinitePointSet<S>> {
        let mut missing = Vec::new();
        for iv in outer.intervals() {
            let inner = self.clip(&iv.lo, &iv.hi);
            let mut cursor = iv.lo.clone();
            for (k, piece) in inner.intervals().iter().enumerate() {
                if piece.lo != cursor {
                    return None;
                }
                if k > 0 {
                    missing.push(cursor.clone());
                }
                cursor = piece.hi.clone();
            }
            if cursor != iv.hi {
                return None;
            }
        }
        Some(FinitePointSet::from_sorted_unchecked(missing))
    }
}

impl<S: fmt::Display> fmt::Display for OpenIntervalSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}
