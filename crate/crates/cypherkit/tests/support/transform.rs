//! Checks of the statement-file fixture run through the full transform.

use std::collections::BTreeSet;

use cypherkit::file_source::FileSource;
use cypherkit::graph_io::write_graph;
use cypherkit::{load_mapping_config, load_unit_table};
use cypherkit_core::rdf::{build_graph, Counts, TransformStats};
use cypherkit_core::{PropertyGraph, PropertyValue};
use serde_json::Value;
use super::fixture;

pub fn run() -> (PropertyGraph, TransformStats) {
    let cfg = load_mapping_config(&fixture("transform/mapping.json")).unwrap();
    let units = load_unit_table(&fixture("transform/units.json")).unwrap();
    let src = FileSource::open(&fixture("transform/statements"), &cfg.label_language).unwrap();
    build_graph(&cfg, &src, &units).unwrap()
}

/// Every well-formed statement line, read without the crate's own types.
fn raw_statements() -> Vec<Value> {
    let mut out = Vec::new();
    for f in ["01_items.jsonl", "02_claims.jsonl"] {
        let text = std::fs::read_to_string(fixture(&format!("transform/statements/{f}"))).unwrap();
        out.extend(text.lines().filter_map(|l| serde_json::from_str::<Value>(l).ok()));
    }
    out
}

fn rank(s: &Value) -> &str {
    s["rank"].as_str().unwrap_or("normal")
}

pub fn output_matches_expected_graph_exactly() {
    let (g, stats) = run();
    let want = std::fs::read_to_string(fixture("transform/expected_graph.json")).unwrap();
    assert_eq!(write_graph(&g), want);
    let want_stats: TransformStats =
        serde_json::from_str(&std::fs::read_to_string(fixture("transform/expected_stats.json")).unwrap()).unwrap();
    assert_eq!(stats, want_stats);
}

pub fn repeated_runs_are_byte_identical() {
    let a = write_graph(&run().0);
    let b = write_graph(&run().0);
    assert_eq!(a, b);
}

pub fn converted_quantities_equal_amount_times_factor() {
    let units: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("transform/units.json")).unwrap()).unwrap();
    let factor = |unit: &str, target: &str| -> Option<f64> {
        units["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["unit_id"] == unit && e["target"] == target)
            .map(|e| e["factor"].as_f64().unwrap())
    };
    let (g, _) = run();
    let cases = [("height_cm", "P2048", "centimetre"), ("runtime_minute", "P2047", "minute")];
    let mut checked = 0;
    for (prop, pid, target) in cases {
        for e in g.entities() {
            let Some(PropertyValue::Float(got)) = e.properties.get(prop) else {
                continue;
            };
            // The surviving statement is the first non-deprecated one, at the best rank, with a known unit.
            let stmts = raw_statements();
            let mut cands: Vec<&Value> = stmts
                .iter()
                .filter(|s| s["subject"] == e.eid.as_str() && s["predicate"] == pid && rank(s) != "deprecated")
                .collect();
            let best = cands.iter().any(|s| rank(s) == "preferred");
            cands.retain(|s| !best || rank(s) == "preferred");
            let want = cands
                .iter()
                .find_map(|s| {
                    let unit = s["value"]["unit"].as_str()?;
                    Some(s["value"]["amount"].as_f64().unwrap() * factor(unit, target)?)
                })
                .unwrap();
            assert_eq!(*got, want, "{}.{prop}", e.eid);
            checked += 1;
        }
    }
    assert_eq!(checked, 5);
}

pub fn deprecated_statements_leave_no_trace() {
    let (g, _) = run();
    let rids: BTreeSet<&str> = g.relations().iter().map(|r| r.rid.as_str()).collect();
    for s in raw_statements().iter().filter(|s| rank(s) == "deprecated") {
        assert!(!rids.contains(s["id"].as_str().unwrap()), "{}", s["id"]);
    }
    // Q101's 200-minute runtime and Q205 (typed only by a deprecated statement).
    assert!(g.entities().iter().all(|e| e.eid != "Q205"));
    assert!(g
        .entities()
        .iter()
        .all(|e| e.properties.get("runtime_minute") != Some(&PropertyValue::Float(200.0))));
}

pub fn dates_come_only_from_day_precision_times() {
    let (g, _) = run();
    let stmts = raw_statements();
    let mut seen = 0;
    for e in g.entities() {
        for v in e.properties.values() {
            let PropertyValue::Date(d) = v else { continue };
            let text = format!("+{d}T00:00:00Z");
            let src = stmts
                .iter()
                .find(|s| s["subject"] == e.eid.as_str() && s["value"]["value"] == text.as_str())
                .unwrap();
            assert!(src["value"]["precision"].as_u64().unwrap() >= 11);
            seen += 1;
        }
    }
    assert_eq!(seen, 3);
}

pub fn connected_only_label_holds_exactly_the_connected_entities() {
    let (g, _) = run();
    let persons: BTreeSet<&str> = g
        .entities()
        .iter()
        .filter(|e| e.label == "Person")
        .map(|e| e.eid.as_str())
        .collect();
    let incident: BTreeSet<&str> = g
        .relations()
        .iter()
        .flat_map(|r| [r.subj.as_str(), r.obj.as_str()])
        .filter(|id| id.starts_with("Q2"))
        .collect();
    assert_eq!(persons, incident);
    assert_eq!(persons, BTreeSet::from(["Q200", "Q201", "Q202"]));
}

pub fn counts_are_conserved() {
    let (_, stats) = run();
    let all: Vec<(&String, &Counts)> = stats
        .entities
        .iter()
        .chain(&stats.relations)
        .chain(&stats.properties)
        .collect();
    for (k, c) in all {
        assert_eq!(c.kept + c.discarded_total(), c.fetched, "{k}");
    }
    assert_eq!(stats.malformed_rows, 1);
}
