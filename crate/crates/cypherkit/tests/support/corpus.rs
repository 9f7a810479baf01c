//! The eighteen reference queries against hand-built domain graphs.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cypherkit_core::cypher::{execute, parse_query, ResultTable};
use cypherkit_core::{Budget, PropertyGraph};
use serde::Deserialize;

use super::{fixture, load_graph};

#[derive(Deserialize)]
pub struct Case {
    pub id: String,
    pub graph: String,
    pub ordered: bool,
    pub cypher: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<cypherkit_core::cypher::Cell>>,
    #[allow(dead_code)]
    derivation: String,
}

pub fn cases() -> Vec<Case> {
    let text = std::fs::read_to_string(fixture("corpus/queries.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn graphs(cases: &[Case]) -> BTreeMap<String, PropertyGraph> {
    cases
        .iter()
        .map(|c| (c.graph.clone(), load_graph(&format!("corpus/{}.json", c.graph))))
        .collect()
}

fn rows(t: &ResultTable, ordered: bool) -> Vec<Vec<String>> {
    let mut r = t.serialized_rows();
    if !ordered {
        r.sort();
    }
    r
}

/// Runs every reference query and compares with its hand-derived table.
/// Returns the total execution time, which must stay under a second.
pub fn check_corpus() -> Duration {
    let cases = cases();
    assert_eq!(cases.len(), 18);
    let graphs = graphs(&cases);
    let start = Instant::now();
    for c in &cases {
        let q = parse_query(&c.cypher).unwrap_or_else(|e| panic!("{}: {e}", c.id));
        let got = execute(&q, &graphs[&c.graph], &Budget::unlimited())
            .unwrap_or_else(|e| panic!("{}: {e}", c.id));
        let want = ResultTable {
            columns: c.columns.clone(),
            rows: c.rows.clone(),
        };
        assert_eq!(got.columns, want.columns, "{}", c.id);
        assert_eq!(rows(&got, c.ordered), rows(&want, c.ordered), "{}", c.id);
    }
    let took = start.elapsed();
    assert!(took.as_secs_f64() < 1.0, "corpus took {took:?}");
    took
}

