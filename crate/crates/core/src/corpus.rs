//! Bundled example manifolds and maps.

use crate::dsl::parse_manifold;
use crate::error::Result;
use crate::geometry::ManifoldSpec;

pub const MANIFOLDS: &[(&str, &str)] = &[
    ("lewy", include_str!("../corpus/lewy.crm")),
    ("ex223", include_str!("../corpus/ex223.crm")),
    ("ex224", include_str!("../corpus/ex224.crm")),
    ("ex315", include_str!("../corpus/ex315.crm")),
    ("ex316", include_str!("../corpus/ex316.crm")),
    ("ex317", include_str!("../corpus/ex317.crm")),
    ("ex35", include_str!("../corpus/ex35.crm")),
    ("r142", include_str!("../corpus/r142.crm")),
    ("rline", include_str!("../corpus/rline.crm")),
    ("degen3", include_str!("../corpus/degen3.crm")),
];

pub const MAPS: &[(&str, &str)] = &[
    ("ex315_twist", include_str!("../corpus/ex315_twist.map")),
    ("ex316_twist", include_str!("../corpus/ex316_twist.map")),
    ("ex35", include_str!("../corpus/ex35.map")),
];

pub fn manifold_text(name: &str) -> Option<&'static str> {
    MANIFOLDS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn map_text(name: &str) -> Option<&'static str> {
    MAPS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parse a bundled manifold by name; panics on unknown names.
pub fn manifold(name: &str) -> Result<ManifoldSpec> {
    parse_manifold(manifold_text(name).unwrap_or_else(|| panic!("no bundled manifold {}", name)))
}

pub fn all() -> Vec<ManifoldSpec> {
    MANIFOLDS.iter().map(|(_, t)| parse_manifold(t).expect("bundled manifold parses")).collect()
}
