//! Shared PSJS fixtures: post-MATCH mutations and a two-branch union graph.

use std::collections::BTreeSet;

use cypherkit_core::cypher::ast::Clause;
use cypherkit_core::cypher::{parse_query, GraphElement, Query};
use cypherkit_core::graph::{Entity, PropertyGraph, Relation};
use cypherkit_core::metrics::provenance_psjs;
use cypherkit_core::schema::{EntitySchema, GraphSchema, RelationSchema};
use cypherkit_core::generator::{generate, GenerateOptions, Quotas, TemplateSet};
use cypherkit_core::{Budget, Deadline, NoDeadline};

fn no_deadline() -> Box<dyn Deadline> {
    Box::new(NoDeadline)
}

pub fn generated(g: &PropertyGraph, seed: u64, per_cell: usize) -> Vec<String> {
    let templates = TemplateSet::default();
    let opts = GenerateOptions {
        seed,
        sample_cap: 10_000,
        draws: 200,
        max_rows: 100_000,
        deadline: &no_deadline,
        templates: &templates,
    };
    generate(g, &Quotas::uniform(per_cell), &opts).0.into_iter().map(|t| t.cypher).collect()
}


pub fn psjs(gold: &str, pred: &str, g: &PropertyGraph) -> f64 {
    let gold = parse_query(gold).unwrap();
    match parse_query(pred) {
        Ok(p) => provenance_psjs(&gold, &p, g, &Budget::unlimited()).score,
        Err(_) => 0.0,
    }
}

/// The query's leading MATCH/CALL clauses followed by `tail`.
pub fn with_tail(q: &Query, tail: &str) -> String {
    let head: Vec<Clause> = q
        .clauses
        .iter()
        .take_while(|c| matches!(c, Clause::Match(_) | Clause::CallUnion(_)))
        .cloned()
        .collect();
    format!("{} {tail}", Query { clauses: head })
}

pub const TAILS: [&str; 4] = [
    "RETURN n",
    "RETURN count(*) AS c",
    "WITH DISTINCT n RETURN n.name AS x, 1 AS extra ORDER BY x DESC LIMIT 1",
    "WITH n WHERE n.name IS NULL RETURN n.name",
];

pub fn politics() -> PropertyGraph {
    let schema = GraphSchema {
        name: "politics".into(),
        entities: ["Person", "Party", "Office"]
            .iter()
            .map(|l| EntitySchema {
                label: (*l).into(),
                properties: vec![],
            })
            .collect(),
        relations: vec![
            RelationSchema {
                label: "memberOf".into(),
                subj_label: "Person".into(),
                obj_label: "Party".into(),
                properties: vec![],
                time_sensitive: false,
                characteristics: Default::default(),
            },
            RelationSchema {
                label: "heldOffice".into(),
                subj_label: "Person".into(),
                obj_label: "Office".into(),
                properties: vec![],
                time_sensitive: false,
                characteristics: Default::default(),
            },
        ],
    }
    .normalize()
    .unwrap();
    let mut ents: Vec<Entity> = (0..6).map(|i| Entity::new(format!("p{i}"), "Person", format!("P{i}"))).collect();
    ents.push(Entity::new("a", "Party", "Greens"));
    ents.push(Entity::new("b", "Party", "Liberals"));
    ents.push(Entity::new("o", "Office", "Mayor"));
    let rels = vec![
        Relation::new("m0", "memberOf", "p0", "a"),
        Relation::new("m1", "memberOf", "p1", "a"),
        Relation::new("m2", "memberOf", "p2", "b"),
        Relation::new("h0", "heldOffice", "p1", "o"),
        Relation::new("h1", "heldOffice", "p3", "o"),
        Relation::new("h2", "heldOffice", "p4", "o"),
    ];
    PropertyGraph::assemble(schema, ents, rels).unwrap()
}

/// Elements of `(subj)-[label]->(obj named target)` matches, enumerated directly.
pub fn branch(g: &PropertyGraph, label: &str, target: &str, with_rel: bool) -> BTreeSet<GraphElement> {
    let mut out = BTreeSet::new();
    for r in g.relation_ids() {
        let rel = g.relation(r);
        let (s, o) = g.endpoints(r);
        if rel.label == label && g.entity(o).name() == Some(target) {
            out.insert(GraphElement::Entity(s));
            out.insert(GraphElement::Entity(o));
            if with_rel {
                out.insert(GraphElement::Relation(r));
            }
        }
    }
    out
}

pub fn jaccard(a: &BTreeSet<GraphElement>, b: &BTreeSet<GraphElement>) -> f64 {
    a.intersection(b).count() as f64 / a.union(b).count() as f64
}

/// One-branch and plain predictions against a two-branch union gold query,
/// checked against set enumeration.
pub fn check_union_partial() {
    let g = politics();
    let gold = "CALL { MATCH (n:Person)-[r0:memberOf]->(m0:Party {name: 'Greens'}) RETURN n, m0 AS m \
                UNION MATCH (n:Person)-[r1:heldOffice]->(m1:Office {name: 'Mayor'}) RETURN n, m1 AS m } \
                WITH DISTINCT n RETURN n.name";
    let full: BTreeSet<GraphElement> =
        branch(&g, "memberOf", "Greens", false).union(&branch(&g, "heldOffice", "Mayor", false)).cloned().collect();

    let one_branch = "CALL { MATCH (n:Person)-[r0:memberOf]->(m0:Party {name: 'Greens'}) RETURN n, m0 AS m } \
                      WITH DISTINCT n RETURN n.name";
    let expected = jaccard(&full, &branch(&g, "memberOf", "Greens", false));
    assert_eq!(expected, 3.0 / 6.0);
    assert_eq!(psjs(gold, one_branch, &g), expected);

    let plain = "MATCH (n:Person)-[r0:memberOf]->(m0:Party {name: 'Greens'}) RETURN n.name";
    let expected = jaccard(&full, &branch(&g, "memberOf", "Greens", true));
    assert_eq!(expected, 3.0 / 8.0);
    assert_eq!(psjs(gold, plain, &g), expected);
}

