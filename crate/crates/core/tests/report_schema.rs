//! The committed JSON schema agrees with what the library serializes.

use std::collections::BTreeSet;

use esym::verify::{run, PropertyId, VerifyConfig};
use serde_json::Value;

fn schema() -> Value {
    serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn required_fields_match_serialized_report() {
    let s = schema();
    let required: BTreeSet<String> = s["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(required, keys(&s["properties"]));
    for property in [PropertyId::Ssli, PropertyId::Sdiv, PropertyId::Eq8Identity] {
        let report = run(&VerifyConfig::new(property, 3, 3, 1)).unwrap();
        let json: Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(keys(&json), required, "{property}");
    }
}

#[test]
fn property_enum_is_exhaustive() {
    let listed: Vec<String> = schema()["properties"]["property"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let names: Vec<String> = PropertyId::ALL
        .iter()
        .map(|p| p.name().to_string())
        .collect();
    assert_eq!(listed, names);
}

#[test]
fn every_witness_kind_is_described() {
    let variants = schema()["properties"]["worst_witness"]["oneOf"].clone();
    let described: BTreeSet<String> = variants
        .as_array()
        .unwrap()
        .iter()
        .map(|v| {
            v["properties"]["kind"]["const"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let witness_of = |p, n| {
        let report = run(&VerifyConfig::new(p, n, 2, 1)).unwrap();
        let json: Value = serde_json::from_str(&report.to_json()).unwrap();
        let w = json["worst_witness"].clone();
        let kind = w["kind"].as_str().unwrap().to_string();
        let schema_variant = variants
            .as_array()
            .unwrap()
            .iter()
            .find(|v| v["properties"]["kind"]["const"] == kind.as_str())
            .unwrap()
            .clone();
        assert_eq!(keys(&w), keys(&schema_variant["properties"]), "{kind}");
        kind
    };
    let produced: BTreeSet<String> = [
        witness_of(PropertyId::Ssli, 3),
        witness_of(PropertyId::Riemannian, 3),
        witness_of(PropertyId::Eq10Identity, 3),
    ]
    .into_iter()
    .chain(["none".to_string()])
    .collect();
    assert_eq!(produced, described);
}
