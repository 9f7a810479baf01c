//! Schema observed from graph data, and its prompt-ready JSON rendering.
//!
//! The derivation scans every entity and relation exactly once, producing
//! per-label property datatypes and the distinct (start label, relation type,
//! end label) triples. Nothing is sampled, so the result is exact.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::graph::PropertyGraph;
use crate::value::Datatype;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityDoc {
    pub label: String,
    pub properties: BTreeMap<String, Datatype>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub label: String,
    pub subj_label: String,
    pub obj_label: String,
    pub properties: BTreeMap<String, Datatype>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDocument {
    pub name: String,
    pub entities: Vec<EntityDoc>,
    pub relations: Vec<RelationDoc>,
}

/// One property observed with more than one datatype.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeConflict {
    pub owner: String,
    pub property: String,
    pub datatypes: Vec<Datatype>,
}

impl core::fmt::Display for DatatypeConflict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "`{}.{}` observed as", self.owner, self.property)?;
        for d in &self.datatypes {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

type Observed = BTreeMap<String, BTreeMap<String, BTreeSet<Datatype>>>;

fn resolve(observed: Observed, conflicts: &mut Vec<DatatypeConflict>) -> BTreeMap<String, BTreeMap<String, Datatype>> {
    observed
        .into_iter()
        .map(|(owner, props)| {
            let props = props
                .into_iter()
                .map(|(p, types)| {
                    if types.len() > 1 {
                        conflicts.push(DatatypeConflict {
                            owner: owner.clone(),
                            property: p.clone(),
                            datatypes: types.iter().copied().collect(),
                        });
                    }
                    let first = *types.iter().next().expect("observed at least once");
                    (p, first)
                })
                .collect();
            (owner, props)
        })
        .collect()
}

/// Derives the observed schema. Conflicting datatypes are reported, never resolved.
pub fn derive_schema(g: &PropertyGraph) -> Result<SchemaDocument, Vec<DatatypeConflict>> {
    let mut ent: Observed = BTreeMap::new();
    for e in g.entities() {
        let props = ent.entry(e.label.clone()).or_default();
        for (k, v) in &e.properties {
            props.entry(k.clone()).or_default().insert(v.datatype());
        }
    }
    let mut rel: Observed = BTreeMap::new();
    let mut triples = BTreeSet::new();
    for r in g.relation_ids() {
        let rel_ = g.relation(r);
        let (s, o) = g.endpoints(r);
        triples.insert((
            rel_.label.clone(),
            g.entity(s).label.clone(),
            g.entity(o).label.clone(),
        ));
        let props = rel.entry(rel_.label.clone()).or_default();
        for (k, v) in &rel_.properties {
            props.entry(k.clone()).or_default().insert(v.datatype());
        }
    }

    let mut conflicts = Vec::new();
    let ent = resolve(ent, &mut conflicts);
    let rel = resolve(rel, &mut conflicts);
    if !conflicts.is_empty() {
        return Err(conflicts);
    }
    Ok(SchemaDocument {
        name: g.name().into(),
        entities: ent
            .into_iter()
            .map(|(label, properties)| EntityDoc { label, properties })
            .collect(),
        relations: triples
            .into_iter()
            .map(|(label, subj_label, obj_label)| RelationDoc {
                properties: rel.get(&label).cloned().unwrap_or_default(),
                label,
                subj_label,
                obj_label,
            })
            .collect(),
    })
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_props(out: &mut String, props: &BTreeMap<String, Datatype>) {
    if props.is_empty() {
        out.push_str("      \"properties\": {}\n");
        return;
    }
    out.push_str("      \"properties\": {\n        ");
    for (i, (k, v)) in props.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", json_str(k), json_str(v.as_str()));
    }
    out.push_str("\n      }\n");
}

impl SchemaDocument {
    /// Renders the document in the layout used inside text-to-Cypher prompts:
    /// two-space indentation with each property map collapsed onto one line.
    /// The output ends with a newline.
    pub fn to_prompt_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"name\": {},", json_str(&self.name));
        if self.entities.is_empty() {
            out.push_str("  \"entities\": [],\n");
        } else {
            out.push_str("  \"entities\": [\n");
            for (i, e) in self.entities.iter().enumerate() {
                out.push_str("    {\n");
                let _ = writeln!(out, "      \"label\": {},", json_str(&e.label));
                write_props(&mut out, &e.properties);
                out.push_str(if i + 1 < self.entities.len() { "    },\n" } else { "    }\n" });
            }
            out.push_str("  ],\n");
        }
        if self.relations.is_empty() {
            out.push_str("  \"relations\": []\n");
        } else {
            out.push_str("  \"relations\": [\n");
            for (i, r) in self.relations.iter().enumerate() {
                out.push_str("    {\n");
                let _ = writeln!(out, "      \"label\": {},", json_str(&r.label));
                let _ = writeln!(out, "      \"subj_label\": {},", json_str(&r.subj_label));
                let _ = writeln!(out, "      \"obj_label\": {},", json_str(&r.obj_label));
                write_props(&mut out, &r.properties);
                out.push_str(if i + 1 < self.relations.len() { "    },\n" } else { "    }\n" });
            }
            out.push_str("  ]\n");
        }
        out.push_str("}\n");
        out
    }
}
