//! Text serialization: scalars as `"p/q"` strings, interval sets as arrays of
//! `[lo, hi]` string pairs, point sets as arrays of strings.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClosedIntervalSet, FinitePointSet, OpenIntervalSet};
use crate::scalar::parse_scalar;
use crate::Scalar;

fn pairs<S: Scalar>(intervals: &[super::Interval<S>]) -> Vec<[String; 2]> {
    intervals
        .iter()
        .map(|iv| [iv.lo.to_string(), iv.hi.to_string()])
        .collect()
}

fn parse_pairs<S: Scalar>(raw: Vec<[String; 2]>) -> Result<Vec<(S, S)>, String> {
    raw.into_iter()
        .map(|[lo, hi]| Ok((parse_scalar(&lo)?, parse_scalar(&hi)?)))
        .collect()
}

impl<S: Scalar> Serialize for OpenIntervalSet<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        pairs(self.intervals()).serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for OpenIntervalSet<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(deserializer)?;
        let parsed = parse_pairs(raw).map_err(D::Error::custom)?;
        OpenIntervalSet::normalize(parsed).map_err(D::Error::custom)
    }
}

impl<S: Scalar> Serialize for ClosedIntervalSet<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        pairs(self.intervals()).serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for ClosedIntervalSet<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(deserializer)?;
        let parsed = parse_pairs(raw).map_err(D::Error::custom)?;
        ClosedIntervalSet::normalize(parsed).map_err(D::Error::custom)
    }
}

impl<S: Scalar> Serialize for FinitePointSet<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.collect_seq(self.iter().map(|p| p.to_string()))
    }
}

impl<'de, S: Scalar> Deserialize<'de> for FinitePointSet<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(deserializer)?;
        raw.iter()
            .map(|p| parse_scalar(p))
            .collect::<Result<FinitePointSet<S>, _>>()
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "as_text")]` for a single scalar field.
pub mod as_text {
    use super::*;

    pub fn serialize<S: Scalar, Ser: Serializer>(value: &S, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, S: Scalar, D: Deserializer<'de>>(deserializer: D) -> Result<S, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_scalar(&raw).map_err(D::Error::custom)
    }
}
