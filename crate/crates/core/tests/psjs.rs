mod common;

use common::psjs::{check_union_partial, generated, politics, psjs, with_tail, TAILS};
use cypherkit_core::cypher::parse_query;
use cypherkit_core::metrics::query_provenance;
use cypherkit_core::synthetic::film_world;
use cypherkit_core::Budget;
use proptest::prelude::*;

#[test]
fn post_match_mutations_keep_psjs_at_one() {
    let g = film_world(5, 120);
    let queries = generated(&g, 3, 3);
    assert!(queries.len() >= 100);
    for gold in queries.iter().take(100) {
        let q = parse_query(gold).unwrap();
        for tail in TAILS {
            let pred = with_tail(&q, tail);
            assert_eq!(psjs(gold, &pred, &g), 1.0, "{gold}\n{pred}");
        }
    }
}

#[test]
fn identical_queries_score_one() {
    let g = film_world(6, 60);
    for q in generated(&g, 1, 1) {
        let set = query_provenance(&parse_query(&q).unwrap(), &g, &Budget::unlimited()).unwrap();
        assert!(!set.is_empty());
        assert_eq!(psjs(&q, &q, &g), 1.0);
    }
}

fn arb_pred() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("MATCH (n:Person) RETURN n.name".to_string()),
        Just("MATCH (n)-[r]->(m) RETURN n".to_string()),
        Just("MATCH (n:Movie)<-[:actedIn]-(p) RETURN p.name".to_string()),
        Just("MATCH (n:Nothing) RETURN n".to_string()),
        Just("RETURN 1".to_string()),
        Just("MATCH (n:Person RETURN".to_string()),
        Just("UNWIND [1,2] AS x RETURN x".to_string()),
        "[A-Za-z(): ]{0,30}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn psjs_stays_in_unit_interval(pred in arb_pred(), k in 0usize..40) {
        let g = film_world(8, 20);
        let golds = generated(&g, 2, 1);
        let gold = &golds[k % golds.len()];
        let s = psjs(gold, &pred, &g);
        prop_assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn union_partial_matches_set_enumeration() {
    check_union_partial();
}

#[test]
fn return_clause_does_not_matter() {
    let g = politics();
    let gold = "MATCH (n:Person)-[:memberOf]->(m:Party {name: 'Greens'}) RETURN n.name";
    let pred = "MATCH (n:Person)-[:memberOf]->(m:Party {name: 'Greens'}) RETURN n.name, m.name, count(*)";
    assert_eq!(psjs(gold, pred, &g), 1.0);
}
