use std::collections::BTreeSet;
use std::fmt;

use crate::Scalar;

/// A finite set of points, stored strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePointSet<S> {
    points: Vec<S>,
}

impl<S: Scalar> Default for FinitePointSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> FinitePointSet<S> {
    pub fn empty() -> Self {
        FinitePointSet { points: Vec::new() }
    }

    pub fn singleton(x: S) -> Self {
        FinitePointSet { points: vec![x] }
    }

    pub(crate) fn from_sorted_unchecked(points: Vec<S>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        FinitePointSet { points }
    }

    pub fn as_slice(&self) -> &[S] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &S) -> bool {
        self.points.binary_search_by(|p| S::compare(p, x)).is_ok()
    }

    pub fn first(&self) -> Option<&S> {
        self.points.first()
    }

    pub fn last(&self) -> Option<&S> {
        self.points.last()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() && j < other.points.len() {
            match self.points[i].cmp(&other.points[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.points[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.points[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.points[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.points[i..]);
        out.extend_from_slice(&other.points[j..]);
        FinitePointSet { points: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.points.iter().filter(|p| !other.contains(p)).cloned().collect()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    /// Points lying in the closed range `[lo, hi]`.
    pub fn range_closed(&self, lo: &S, hi: &S) -> &[S] {
        let start = self.points.partition_point(|p| p < lo);
        let end = self.points.partition_point(|p| p <= hi);
        &self.points[start..end.max(start)]
    }

    /// Points lying in the open range `(lo, hi)`.
    pub fn range_open(&self, lo: &S, hi: &S) -> &[S] {
        let start = self.points.partition_point(|p| p <= lo);
        let end = self.points.partition_point(|p| p < hi);
        &self.points[start..end.max(start)]
    }

    /// Largest distance between consecutive members of `{lo} ∪ (P ∩ [lo,hi]) ∪ {hi}`.
    pub fn max_gap_within(&self, lo: &S, hi: &S) -> S {
        let mut prev = lo.clone();
        let mut best = S::zero();
        for p in self.range_closed(lo, hi) {
            let gap = p.clone() - prev;
            if gap > best {
                best = gap;
            }
            prev = p.clone();
        }
        let tail = hi.clone() - prev;
        if tail > best {
            best = tail;
        }
        best
    }
}

impl<S: Scalar> FromIterator<S> for FinitePointSet<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut points: Vec<S> = iter.into_iter().collect();
        points.sort_unstable_by(S::compare);
        points.dedup_by(|a, b| S::compare(a, b).is_eq());
        FinitePointSet { points }
    }
}

impl<S: Scalar> From<BTreeSet<S>> for FinitePointSet<S> {
    fn from(set: BTreeSet<S>) -> Self {
        FinitePointSet {
            points: set.into_iter().collect(),
        }
    }
}

impl<'a, S> IntoIterator for &'a FinitePointSet<S> {
    type Item = &'a S;
    type IntoIter = std::slice::Iter<'a, S>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

impl<S: fmt::Display> fmt::Display for FinitePointSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
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
    fn dedups_and_sorts() {
        let set: FinitePointSet<Rational> = [r(1, 2), r(0, 1), r(2, 4), r(1, 1)].into_iter().collect();
        assert_eq!(set.as_slice(), &[r(0, 1), r(1, 2), r(1, 1)]);
        assert!(set.contains(&r(1, 2)));
        assert!(!set.contains(&r(1, 3)));
    }

    #[test]
    fn max_gap_includes_ends() {
        let dyadics: FinitePointSet<Rational> = (0..=8).map(|k| r(k, 8)).collect();
        assert_eq!(dyadics.max_gap_within(&r(0, 1), &r(1, 1)), r(1, 8));
        let empty = FinitePointSet::<Rational>::empty();
        assert_eq!(empty.max_gap_within(&r(0, 1), &r(1, 1)), r(1, 1));
        let lopsided: FinitePointSet<Rational> = [r(1, 10)].into_iter().collect();
        assert_eq!(lopsided.max_gap_within(&r(0, 1), &r(1, 1)), r(9, 10));
    }

    #[test]
    fn ranges() {
        let set: FinitePointSet<Rational> = (0..=4).map(|k| r(k, 4)).collect();
        assert_eq!(set.range_open(&r(0, 1), &r(1, 2)), &[r(1, 4)]);
        assert_eq!(set.range_closed(&r(0, 1), &r(1, 2)), &[r(0, 1), r(1, 4), r(1, 2)]);
        assert!(set.range_open(&r(1, 3), &r(1, 3)).is_empty());
        let other: FinitePointSet<Rational> = [r(1, 3), r(1, 2)].into_iter().collect();
        assert_eq!(set.union(&other).len(), 6);
        assert_eq!(other.difference(&set).as_slice(), &[r(1, 3)]);
    }
}
