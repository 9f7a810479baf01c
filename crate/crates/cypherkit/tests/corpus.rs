//! The eighteen reference queries against hand-built domain graphs.

mod support;

use cypherkit_core::cypher::{execute, parse_query};
use cypherkit_core::Budget;
use support::corpus::{cases, check_corpus};
use support::load_graph;

#[test]
fn every_reference_query_returns_its_table() {
    check_corpus();
}

#[test]
fn corpus_graphs_are_valid() {
    for c in cases() {
        let g = load_graph(&format!("corpus/{}.json", c.graph));
        assert!(g.validate().is_empty(), "{}", c.graph);
    }
}

#[test]
fn dropping_distinct_changes_the_aggregate() {
    let g = load_graph("corpus/biology.json");
    let q = parse_query(
        "MATCH (n:Taxon)-[r0:feedsOn]->(m0:Taxon {name: 'Leporidae'}) RETURN avg(n.longest_lifespan_years)",
    )
    .unwrap();
    let t = execute(&q, &g, &Budget::unlimited()).unwrap();
    assert_eq!(t.serialized_rows(), vec![vec!["20".to_string()]]);
}
