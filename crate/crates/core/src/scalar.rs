//! Ordered-field scalar abstraction.
//!
//! Every coordinate in this crate (breakpoints, slopes, interval endpoints,
//! orbit points) is a value of some type implementing [`Scalar`]. The trait
//! asks for an exact ordered field: comparisons must be total and decisive,
//! because coincidences of endpoints are exactly what the set algebra has to
//! get right. Floating point types are therefore not scalars.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, Signed, Zero};

/// An exact ordered field with a canonical text form.
///
/// `Display` and `FromStr` must round-trip bit-exactly; for ratios this is the
/// reduced `p/q` form with `/q` omitted when `q = 1`.
pub trait Scalar: Clone + Ord + Hash + Debug + Display + FromStr + Num + Signed + Send + Sync + 'static {
    fn from_int(value: i64) -> Self;

    fn from_frac(numer: i64, denom: i64) -> Self {
        Self::from_int(numer) / Self::from_int(denom)
    }

    /// `2^-k`, used for shrinking radii and dyadic grids.
    fn dyadic(k: u32) -> Self {
        let mut out = Self::one();
        let two = Self::from_int(2);
        for _ in 0..k {
            out = out / two.clone();
        }
        out
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / Self::from_int(2)
    }

    /// `slope·x + intercept`.
    fn affine(slope: &Self, x: &Self, intercept: &Self) -> Self {
        slope.clone() * x.clone() + intercept.clone()
    }

    /// Same result as `Ord::cmp`; lookups on hot paths call this instead.
    fn compare(a: &Self, b: &Self) -> Ordering {
        a.cmp(b)
    }

    /// Lossy conversion for diagnostics that are explicitly approximate.
    fn approx_f64(&self) -> f64 {
        self.to_string()
            .split_once('/')
            .map(|(n, d)| n.parse::<f64>().unwrap_or(f64::NAN) / d.parse::<f64>().unwrap_or(f64::NAN))
            .unwrap_or_else(|| self.to_string().parse().unwrap_or(f64::NAN))
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + Hash + Debug + Display + FromStr + From<i64> + Send + Sync + 'static,
{
    fn from_int(value: i64) -> Self {
        Ratio::from_integer(T::from(value))
    }

    fn from_frac(numer: i64, denom: i64) -> Self {
        Ratio::new(T::from(numer), T::from(denom))
    }

    /// With all three inputs reduced, only primes of `sn·sd·bd` can divide
    /// both the raw numerator and denominator, so every gcd runs on values
    /// below that product.
    fn affine(slope: &Self, x: &Self, intercept: &Self) -> Self {
        if slope.is_zero() {
            return intercept.clone();
        }
        let (sn, sd) = (slope.numer(), slope.denom());
        let (bn, bd) = (intercept.numer(), intercept.denom());
        let d = sd.clone() * x.denom().clone();
        let l = d.clone() / (d.clone() % bd.clone()).gcd(bd) * bd.clone();
        let mut n = sn.clone() * x.numer().clone() * (l.clone() / d) + bn.clone() * (l.clone() / bd.clone());
        if n.is_zero() {
            return Self::zero();
        }
        let mut l = l;
        let k = (sn.clone() * sd.clone() * bd.clone()).abs();
        loop {
            let h = (n.clone() % k.clone()).gcd(&(l.clone() % k.clone())).gcd(&k);
            if h.is_one() {
                break;
            }
            n = n / h.clone();
            l = l / h;
        }
        Ratio::new_raw(n, l)
    }

    /// Cross-multiplication; the default ordering expands continued fractions.
    fn compare(a: &Self, b: &Self) -> Ordering {
        if a.denom() == b.denom() {
            return a.numer().cmp(b.numer());
        }
        (a.numer().clone() * b.denom().clone()).cmp(&(b.numer().clone() * a.denom().clone()))
    }
}

/// Parses a scalar from its canonical text form, mapping the error to a string.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, String> {
    text.trim()
        .parse::<S>()
        .map_err(|_| format!("not a rational number: {text:?}"))
}
