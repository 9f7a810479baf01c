//! A SPARQL endpoint stand-in answering the client's exact query strings from
//! a statement list, with Wikidata's result conventions.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use cypherkit::sparql::{
    instances_query, property_query, relation_query, ENTITY_PREFIX, ONTOLOGY_PREFIX, QUALIFIER_PREFIX,
    STATEMENT_PREFIX, UNITLESS, XSD_PREFIX,
};
use cypherkit_core::rdf::{MappingConfig, Rank, RawValue, Statement};
use serde_json::{json, Map, Value};

use super::http::{serve, MockServer};

fn uri(v: String) -> Value {
    json!({"type": "uri", "value": v})
}

fn entity(id: &str) -> Value {
    uri(format!("{ENTITY_PREFIX}{id}"))
}

fn typed(v: String, xsd: &str) -> Value {
    json!({"type": "literal", "datatype": format!("{XSD_PREFIX}{xsd}"), "value": v})
}

fn rank(r: Rank) -> Value {
    let name = match r {
        Rank::Preferred => "PreferredRank",
        Rank::Normal => "NormalRank",
        Rank::Deprecated => "DeprecatedRank",
    };
    uri(format!("{ONTOLOGY_PREFIX}{name}"))
}

struct Data<'a> {
    stmts: &'a [Statement],
    lang: &'a str,
}

impl Data<'_> {
    /// Only labels in the requested language survive the endpoint's LANG filter.
    fn label(&self, id: &str) -> Option<Value> {
        self.stmts.iter().find_map(|s| match &s.value {
            RawValue::Monolingual { text, lang } if s.subject == id && s.predicate == "rdfs:label" && lang == self.lang => {
                Some(json!({"type": "literal", "xml:lang": lang, "value": text}))
            }
            _ => None,
        })
    }

    fn is_a(&self, id: &str, type_id: &str) -> bool {
        self.stmts.iter().any(|s| {
            s.subject == id
                && s.predicate == "P31"
                && s.rank != Rank::Deprecated
                && matches!(&s.value, RawValue::Entity { id, .. } if id == type_id)
        })
    }

    /// Value term plus its label, precision and unit terms, under the given variable names.
    fn value_terms(&self, v: &RawValue, names: [&str; 4], row: &mut Map<String, Value>) {
        let [val, label, prec, unit] = names;
        match v {
            RawValue::Entity { id, .. } => {
                row.insert(val.into(), entity(id));
                if let Some(l) = self.label(id) {
                    row.insert(label.into(), l);
                }
            }
            RawValue::Quantity { amount, unit: u } => {
                row.insert(val.into(), typed(amount.to_string(), "decimal"));
                row.insert(unit.into(), u.as_deref().map_or_else(|| uri(UNITLESS.into()), entity));
            }
            RawValue::Time { value, precision } => {
                row.insert(val.into(), typed(value.clone(), "dateTime"));
                row.insert(prec.into(), typed(precision.to_string(), "integer"));
            }
            RawValue::Text { text } => {
                row.insert(val.into(), json!({"type": "literal", "value": text}));
            }
            RawValue::Monolingual { text, lang } => {
                row.insert(val.into(), json!({"type": "literal", "xml:lang": lang, "value": text}));
            }
        }
    }

    fn head(&self, s: &Statement) -> Map<String, Value> {
        let mut row = Map::new();
        row.insert("statement".into(), uri(format!("{STATEMENT_PREFIX}{}", s.id)));
        row.insert("subj".into(), entity(&s.subject));
        row.insert("rank".into(), rank(s.rank));
        row
    }

    fn instances(&self, type_id: &str) -> Vec<Map<String, Value>> {
        let mut ids: Vec<&str> = self
            .stmts
            .iter()
            .map(|s| s.subject.as_str())
            .filter(|id| self.is_a(id, type_id))
            .collect();
        ids.sort();
        ids.dedup();
        ids.into_iter()
            .map(|id| {
                let mut row = Map::new();
                row.insert("item".into(), entity(id));
                if let Some(l) = self.label(id) {
                    row.insert("label".into(), l);
                }
                row
            })
            .collect()
    }

    fn relations(&self, subj: &str, pred: &str, obj: &str, quals: &[&str]) -> Vec<Map<String, Value>> {
        let mut rows = Vec::new();
        for s in self.stmts.iter().filter(|s| s.predicate == pred && self.is_a(&s.subject, subj)) {
            let RawValue::Entity { id, .. } = &s.value else { continue };
            if !self.is_a(id, obj) {
                continue;
            }
            let mut base = self.head(s);
            self.value_terms(&s.value, ["obj", "objLabel", "", ""], &mut base);
            let mut any = false;
            for q in s.qualifiers.iter().filter(|q| quals.contains(&q.property.as_str())) {
                let mut row = base.clone();
                row.insert("qp".into(), uri(format!("{QUALIFIER_PREFIX}{}", q.property)));
                self.value_terms(&q.value, ["qv", "qvLabel", "qprec", "qunit"], &mut row);
                rows.push(row);
                any = true;
            }
            if !any {
                rows.push(base);
            }
        }
        rows
    }

    fn properties(&self, type_id: &str, pred: &str) -> Vec<Map<String, Value>> {
        let mut rows = Vec::new();
        for s in self.stmts.iter().filter(|s| s.predicate == pred && self.is_a(&s.subject, type_id)) {
            let mut row = self.head(s);
            self.value_terms(&s.value, ["value", "valueLabel", "prec", "unit"], &mut row);
            rows.push(row);
        }
        rows
    }
}

fn sort_key(row: &Map<String, Value>, vars: &[&str]) -> Vec<String> {
    vars.iter()
        .map(|v| row.get(*v).and_then(|t| t["value"].as_str()).unwrap_or("").to_string())
        .collect()
}

/// Registers every page of `rows` under the query text the client will send.
fn paginate(
    pages: &mut BTreeMap<String, String>,
    mut rows: Vec<Map<String, Value>>,
    order: &[&str],
    page_size: usize,
    build: impl Fn(usize, usize) -> String,
) {
    rows.sort_by_key(|r| sort_key(r, order));
    let mut offset = 0;
    loop {
        let page: Vec<&Map<String, Value>> = rows.iter().skip(offset).take(page_size).collect();
        let doc = json!({"head": {"vars": []}, "results": {"bindings": page}});
        pages.insert(build(page_size, offset), doc.to_string());
        if offset >= rows.len() {
            break;
        }
        offset += page_size;
    }
}

pub struct SparqlMockOptions {
    pub page_size: usize,
    /// Requests answered with 503 before the endpoint starts working.
    pub fail_first: usize,
    pub token: Option<String>,
}

pub fn sparql_endpoint(stmts: &[Statement], cfg: &MappingConfig, opts: SparqlMockOptions) -> MockServer {
    let lang = cfg.label_language.as_str();
    let data = Data { stmts, lang };
    let ps = opts.page_size;
    let mut pages = BTreeMap::new();
    for e in &cfg.entities {
        let t = e.wd_source.as_str();
        paginate(&mut pages, data.instances(t), &["item"], ps, |l, o| {
            instances_query(t, lang, l, o).unwrap()
        });
        for p in &e.properties {
            let pid = p.wd_source.as_str();
            paginate(&mut pages, data.properties(t, pid), &["statement", "value"], ps, |l, o| {
                property_query(t, pid, lang, l, o).unwrap()
            });
        }
    }
    for r in &cfg.relations {
        let ty = |label: &str| cfg.entity(label).unwrap().wd_source.clone();
        let (s, o) = (ty(&r.subj_label), ty(&r.obj_label));
        let quals: Vec<&str> = r.properties.iter().map(|p| p.wd_source.as_str()).collect();
        let rows = data.relations(&s, &r.wd_source, &o, &quals);
        paginate(&mut pages, rows, &["statement", "qp", "qv"], ps, |l, off| {
            relation_query(&s, &r.wd_source, &o, &quals, lang, l, off).unwrap()
        });
    }
    let failures = AtomicUsize::new(opts.fail_first);
    serve(move |req| {
        if let Some(t) = &opts.token {
            if req.header("authorization") != Some(format!("Bearer {t}").as_str()) {
                return (401, "{}".into());
            }
        }
        if failures.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok() {
            return (503, "{}".into());
        }
        match req.form("query").and_then(|q| pages.get(&q).cloned()) {
            Some(body) => (200, body),
            None => (400, format!("unexpected query on {}", req.path)),
        }
    })
}
