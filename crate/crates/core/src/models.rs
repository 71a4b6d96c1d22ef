//! The bundled example maps. The JSON files under `maps/` are the single
//! source; the constructors here parse them.

use crate::pwmap::{MapConfig, ModifiedMap};
use crate::Scalar;

pub const TENT_JSON: &str = include_str!("../../../maps/tent.json");
pub const TWO_COMPONENT_JSON: &str = include_str!("../../../maps/two_component.json");
pub const H_PRIME_JSON: &str = include_str!("../../../maps/h_prime.json");
pub const CONTRACTION_JSON: &str = include_str!("../../../maps/contraction.json");

/// `(name, json)` for every bundled map.
pub const BUNDLED: [(&str, &str); 4] = [
    ("tent", TENT_JSON),
    ("two_component", TWO_COMPONENT_JSON),
    ("h_prime", H_PRIME_JSON),
    ("contraction", CONTRACTION_JSON),
];

fn load<S: Scalar>(json: &str) -> ModifiedMap<S> {
    MapConfig::from_json(json)
        .and_then(|cfg| cfg.to_model())
        .expect("bundled maps are valid")
}

/// `2x` on `(0,1/2)`, `2 - 2x` on `(1/2,1)`.
pub fn tent<S: Scalar>() -> ModifiedMap<S> {
    load(TENT_JSON)
}

/// Two tents of height 1/2 on `[0,1/2]` and `[1/2,1]`, each mapping its half onto itself.
pub fn two_component<S: Scalar>() -> ModifiedMap<S> {
    load(TWO_COMPONENT_JSON)
}

/// Interval encoding of a three-edge cyclic graph map on `[0,3]`.
pub fn h_prime<S: Scalar>() -> ModifiedMap<S> {
    load(H_PRIME_JSON)
}

/// `x/2 + 1/4` on `[0,1]`.
pub fn contraction<S: Scalar>() -> ModifiedMap<S> {
    load(CONTRACTION_JSON)
}
