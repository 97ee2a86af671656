#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use enriques::document::{parse_document, Document};
use enriques::{BigInt, PointId};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub fn load(name: &str) -> Document<BigInt> {
    parse_document(&fixture_text(name)).expect("fixture parses")
}

pub fn load_as<T: enriques::Scalar>(name: &str) -> Document<T> {
    parse_document(&fixture_text(name)).expect("fixture parses")
}

pub fn id(doc: &Document<impl enriques::Scalar>, name: &str) -> PointId {
    doc.names.get(name).unwrap_or_else(|| panic!("no point {name}"))
}

pub fn ids(doc: &Document<impl enriques::Scalar>, names: &[&str]) -> BTreeSet<PointId> {
    names.iter().map(|n| id(doc, n)).collect()
}

pub fn named(doc: &Document<impl enriques::Scalar>, set: &BTreeSet<PointId>) -> Vec<String> {
    set.iter().map(|p| doc.names.name(*p)).collect()
}

pub fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(a: i64, b: i64) -> num_rational::Ratio<BigInt> {
    num_rational::Ratio::new(big(a), big(b))
}

/// Weights of `k` listed in the order of `names`.
pub fn weights_of(
    doc: &Document<BigInt>,
    k: &enriques::WeightedCluster<BigInt>,
    names: &[&str],
) -> Vec<i64> {
    use num_traits::ToPrimitive;
    names
        .iter()
        .map(|n| k.weight(id(doc, n)).unwrap_or_else(|| panic!("{n} not in cluster")).to_i64().unwrap())
        .collect()
}
