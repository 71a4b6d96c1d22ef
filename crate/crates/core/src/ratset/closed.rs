use std::fmt;

use super::{FinitePointSet, Interval, OpenIntervalSet, SetError};
use crate::Scalar;

/// A finite union of closed intervals `[lo, hi]` (points allowed), sorted and
/// separated by strictly positive gaps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClosedIntervalSet<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: Scalar> Default for ClosedIntervalSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> ClosedIntervalSet<S> {
    pub fn empty() -> Self {
        ClosedIntervalSet { intervals: Vec::new() }
    }

    pub fn interval(lo: S, hi: S) -> Result<Self, SetError> {
        Self::normalize([(lo, hi)])
    }

    /// Builds the canonical form of a union of closed intervals. Overlapping and
    /// touching intervals are merged.
    pub fn normalize<I>(raw: I) -> Result<Self, SetError>
    where
        I: IntoIterator<Item = (S, S)>,
    {
        let mut items = Vec::new();
        for (lo, hi) in raw {
            if lo > hi {
                return Err(SetError::EmptyClosedInterval {
                    lo: lo.to_string(),
                    hi: hi.to_string(),
                });
            }
            items.push(Interval { lo, hi });
        }
        Ok(Self::merge(items))
    }

    pub(crate) fn merge(mut items: Vec<Interval<S>>) -> Self {
        items.sort();
        let mut out: Vec<Interval<S>> = Vec::with_capacity(items.len());
        for iv in items {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        ClosedIntervalSet { intervals: out }
    }

    pub fn from_points(points: &FinitePointSet<S>) -> Self {
        ClosedIntervalSet {
            intervals: points.iter().map(|p| Interval::new(p.clone(), p.clone())).collect(),
        }
    }

    pub fn intervals(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: &S) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains_closed(x))
    }

    /// Drops degenerate pieces and opens every remaining interval.
    pub fn interior(&self) -> OpenIntervalSet<S> {
        OpenIntervalSet::from_sorted_unchecked(self.intervals.iter().filter(|iv| iv.lo < iv.hi).cloned().collect())
    }

    /// Endpoints of the constituent intervals; for a canonical closed set this
    /// is exactly its topological boundary in the real line.
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
            let lo = (&a.lo).max(&b.lo);
            let hi = (&a.hi).min(&b.hi);
            if lo <= hi {
                out.push(Interval::new(lo.clone(), hi.clone()));
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::merge(out)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        &self.intersect(other) == self
    }
}

impl<S: fmt::Display> fmt::Display for ClosedIntervalSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "[{}, {}]", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn merges_touching_and_overlapping() {
        let set = ClosedIntervalSet::normalize([(r(1, 1), r(2, 1)), (r(0, 1), r(1, 1)), (r(3, 1), r(3, 1))]).unwrap();
        assert_eq!(set.intervals().len(), 2);
        assert_eq!(set.intervals()[0], Interval::new(r(0, 1), r(2, 1)));
        assert!(set.contains(&r(3, 1)));
        assert!(!set.contains(&r(5, 2)));
    }

    #[test]
    fn interior_drops_isolated_points() {
        let set = ClosedIntervalSet::normalize([(r(0, 1), r(1, 1)), (r(2, 1), r(2, 1))]).unwrap();
        let inside = set.interior();
        assert_eq!(inside, OpenIntervalSet::interval(r(0, 1), r(1, 1)).unwrap());
    }

    #[test]
    fn rejects_reversed() {
        assert!(ClosedIntervalSet::interval(r(1, 1), r(0, 1)).is_err());
    }

    #[test]
    fn intersection_keeps_single_points() {
        let a = ClosedIntervalSet::interval(r(0, 1), r(1, 1)).unwrap();
        let b = ClosedIntervalSet::interval(r(1, 1), r(2, 1)).unwrap();
        let meet = a.intersect(&b);
        assert_eq!(meet.intervals(), &[Interval::new(r(1, 1), r(1, 1))]);
        assert!(meet.interior().is_empty());
    }
}
