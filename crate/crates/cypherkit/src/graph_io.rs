//! The graph JSON file format.
//!
//! ```json
//! {"name": "...", "schema": {...},
//!  "entities": [{"eid": "...", "label": "...", "properties": {...}}],
//!  "relations": [{"rid": "...", "label": "...", "subj": "...", "obj": "...", "properties": {...}}]}
//! ```
//!
//! Property values are typed by the embedded schema: dates are ISO strings,
//! `list[str]` values are arrays of strings and `null` means absent.

use std::collections::BTreeMap;
use std::path::Path;

use cypherkit_core::graph::{GraphError, Properties, Violation};
use cypherkit_core::schema::SchemaError;
use cypherkit_core::{Datatype, Date, Entity, GraphSchema, PropertyGraph, PropertyValue, Relation};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum GraphFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid schema block: {0}")]
    Schema(#[from] SchemaError),
    #[error("{path} ({id}): {message}")]
    Value {
        path: String,
        id: String,
        message: String,
    },
    #[error(transparent)]
    Structure(#[from] GraphError),
    #[error("{path} ({}): {} [{}]{}", .violation.id, .violation.message, .violation.kind,
        if *.more > 0 { format!(" and {} more violation(s)", .more) } else { String::new() })]
    Violation {
        path: String,
        violation: Violation,
        more: usize,
    },
}

#[derive(Deserialize)]
struct RawGraph {
    name: String,
    schema: GraphSchema,
    #[serde(default)]
    entities: Vec<RawEntity>,
    #[serde(default)]
    relations: Vec<RawRelation>,
}

#[derive(Deserialize)]
struct RawEntity {
    eid: String,
    label: String,
    #[serde(default)]
    properties: Map<String, Value>,
}

#[derive(Deserialize)]
struct RawRelation {
    rid: String,
    label: String,
    subj: String,
    obj: String,
    #[serde(default)]
    properties: Map<String, Value>,
}

fn shape_of(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn as_declared(v: &Value, d: Datatype) -> Result<PropertyValue, String> {
    let mismatch = || format!("expected {d}, found {}", shape_of(v));
    match d {
        Datatype::Str => v
            .as_str()
            .map(|s| PropertyValue::Text(s.into()))
            .ok_or_else(mismatch),
        Datatype::Int => match v {
            Value::Number(n) if n.is_i64() => Ok(PropertyValue::Int(n.as_i64().unwrap())),
            Value::Number(n) if n.is_u64() => {
                Err(format!("integer {n} is out of the 64-bit signed range"))
            }
            _ => Err(mismatch()),
        },
        Datatype::Float => v.as_f64().map(PropertyValue::Float).ok_or_else(mismatch),
        Datatype::Date => {
            let s = v.as_str().ok_or_else(mismatch)?;
            Date::parse_iso(s)
                .map(PropertyValue::Date)
                .map_err(|e| format!("`{s}` is not a valid date: {e}"))
        }
        Datatype::ListStr => {
            let items = v.as_array().ok_or_else(mismatch)?;
            items
                .iter()
                .map(|i| i.as_str().map(String::from))
                .collect::<Option<Vec<_>>>()
                .map(PropertyValue::ListText)
                .ok_or_else(|| "list[str] may only hold strings".to_string())
        }
    }
}

fn by_shape(v: &Value) -> Option<PropertyValue> {
    match v {
        Value::String(s) => Some(PropertyValue::Text(s.clone())),
        Value::Number(n) if n.is_i64() => n.as_i64().map(PropertyValue::Int),
        Value::Number(n) => n.as_f64().map(PropertyValue::Float),
        Value::Array(_) => as_declared(v, Datatype::ListStr).ok(),
        _ => None,
    }
}

struct Decoder {
    strict: bool,
}

impl Decoder {
    fn properties(
        &self,
        raw: &Map<String, Value>,
        declared: impl Fn(&str) -> Option<Datatype>,
        path: &str,
        id: &str,
    ) -> Result<Properties, GraphFileError> {
        let mut out = Properties::new();
        for (k, v) in raw {
            if v.is_null() {
                continue;
            }
            let err = |message: String| GraphFileError::Value {
                path: format!("{path}.properties.{k}"),
                id: id.into(),
                message,
            };
            let value = match declared(k) {
                Some(d) => match as_declared(v, d) {
                    Ok(p) => p,
                    Err(m) if self.strict => return Err(err(m)),
                    Err(m) => by_shape(v).ok_or_else(|| err(m))?,
                },
                None if self.strict => {
                    return Err(err("property is not declared in the schema".into()))
                }
                None => by_shape(v)
                    .ok_or_else(|| err(format!("{} is not a storable value", shape_of(v))))?,
            };
            out.insert(k.clone(), value);
        }
        Ok(out)
    }

    fn graph(&self, bytes: &[u8]) -> Result<PropertyGraph, GraphFileError> {
        let raw: RawGraph = serde_json::from_slice(bytes)?;
        let mut schema = raw.schema.normalize()?;
        schema.name = raw.name;
        let mut entities = Vec::with_capacity(raw.entities.len());
        for (i, e) in raw.entities.iter().enumerate() {
            let path = format!("entities[{i}]");
            if self.strict && schema.entity(&e.label).is_none() {
                return Err(GraphFileError::Value {
                    path: format!("{path}.label"),
                    id: e.eid.clone(),
                    message: format!("entity label `{}` is not declared", e.label),
                });
            }
            let properties = self.properties(
                &e.properties,
                |p| schema.entity_property(&e.label, p),
                &path,
                &e.eid,
            )?;
            entities.push(Entity {
                eid: e.eid.clone(),
                label: e.label.clone(),
                properties,
            });
        }
        let mut relations = Vec::with_capacity(raw.relations.len());
        for (i, r) in raw.relations.iter().enumerate() {
            let path = format!("relations[{i}]");
            if self.strict && schema.relation(&r.label).is_none() {
                return Err(GraphFileError::Value {
                    path: format!("{path}.label"),
                    id: r.rid.clone(),
                    message: format!("relation label `{}` is not declared", r.label),
                });
            }
            let properties = self.properties(
                &r.properties,
                |p| schema.relation_property(&r.label, p),
                &path,
                &r.rid,
            )?;
            relations.push(Relation {
                rid: r.rid.clone(),
                label: r.label.clone(),
                subj: r.subj.clone(),
                obj: r.obj.clone(),
                properties,
            });
        }
        Ok(PropertyGraph::assemble(schema, entities, relations)?)
    }
}

/// Decodes and fully validates a graph file. Any schema violation is an error
/// naming the offending id and its JSON path.
pub fn parse_graph(bytes: &[u8]) -> Result<PropertyGraph, GraphFileError> {
    let g = Decoder { strict: true }.graph(bytes)?;
    let mut violations = g.validate();
    if violations.is_empty() {
        return Ok(g);
    }
    let more = violations.len() - 1;
    let violation = violations.swap_remove(0);
    let path = match g.entity_id(&violation.id) {
        Some(id) => format!("entities[{}]", id.0),
        None => g
            .relation_id(&violation.id)
            .map(|id| format!("relations[{}]", id.0))
            .unwrap_or_default(),
    };
    Err(GraphFileError::Violation {
        path,
        violation,
        more,
    })
}

/// Decodes a graph without schema checks so that [`PropertyGraph::validate`]
/// can list every problem. Values that do not fit their declared datatype
/// are kept with the type their JSON shape suggests.
pub fn decode_graph_lenient(bytes: &[u8]) -> Result<PropertyGraph, GraphFileError> {
    Decoder { strict: false }.graph(bytes)
}

pub fn read_graph_file(path: &Path) -> Result<PropertyGraph, GraphFileError> {
    let bytes = std::fs::read(path).map_err(|source| GraphFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_graph(&bytes)
}

fn value_json(v: &PropertyValue) -> Value {
    match v {
        PropertyValue::Text(s) => Value::String(s.clone()),
        PropertyValue::Int(i) => Value::from(*i),
        PropertyValue::Float(x) => Value::from(*x),
        PropertyValue::Date(d) => Value::String(d.to_string()),
        PropertyValue::ListText(l) => Value::from(l.clone()),
    }
}

fn properties_json(p: &Properties) -> BTreeMap<&str, Value> {
    p.iter().map(|(k, v)| (k.as_str(), value_json(v))).collect()
}

#[derive(Serialize)]
struct OutEntity<'a> {
    eid: &'a str,
    label: &'a str,
    properties: BTreeMap<&'a str, Value>,
}

#[derive(Serialize)]
struct OutRelation<'a> {
    rid: &'a str,
    label: &'a str,
    subj: &'a str,
    obj: &'a str,
    properties: BTreeMap<&'a str, Value>,
}

#[derive(Serialize)]
struct OutGraph<'a> {
    name: &'a str,
    schema: &'a GraphSchema,
    entities: Vec<OutEntity<'a>>,
    relations: Vec<OutRelation<'a>>,
}

/// Canonical serialization: entities sorted by eid, relations by rid,
/// properties by key. Equal graph content always gives equal bytes.
pub fn write_graph(g: &PropertyGraph) -> String {
    let mut entities: Vec<OutEntity> = g
        .entities()
        .iter()
        .map(|e| OutEntity {
            eid: &e.eid,
            label: &e.label,
            properties: properties_json(&e.properties),
        })
        .collect();
    entities.sort_by(|a, b| a.eid.cmp(b.eid));
    let mut relations: Vec<OutRelation> = g
        .relations()
        .iter()
        .map(|r| OutRelation {
            rid: &r.rid,
            label: &r.label,
            subj: &r.subj,
            obj: &r.obj,
            properties: properties_json(&r.properties),
        })
        .collect();
    relations.sort_by(|a, b| a.rid.cmp(b.rid));
    let out = OutGraph {
        name: g.name(),
        schema: g.schema(),
        entities,
        relations,
    };
    let mut s = serde_json::to_string_pretty(&out).expect("graph values always serialize");
    s.push('\n');
    s
}

/// The columns of a graph-statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub entity_types: usize,
    pub relation_types: usize,
    pub properties: usize,
}

impl GraphStats {
    pub fn of(g: &PropertyGraph) -> Self {
        let s = g.schema();
        GraphStats {
            entities: g.entity_count(),
            relations: g.relation_count(),
            entity_types: s.entities.len(),
            relation_types: s.relation_labels().len(),
            properties: s.property_count(),
        }
    }

    pub const HEADER: &'static str = "Ent.\tRel.\tEnt. Types\tRel. Types\tProperties";

    pub fn row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.entities, self.relations, self.entity_types, self.relation_types, self.properties
        )
    }
}
