//! The in-memory property graph: entities, relations, and the lookup indexes the
//! Cypher engine seeks through.
//!
//! A [`PropertyGraph`] is immutable once assembled. Every index is derived from
//! the entity and relation vectors inside [`PropertyGraph::assemble`], so
//! re-assembling the same content always yields identical lookups.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::schema::{GraphSchema, NAME_PROPERTY};
use crate::value::{Datatype, PropertyValue};

pub type Properties = BTreeMap<String, PropertyValue>;

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub eid: String,
    pub label: String,
    pub properties: Properties,
}

impl Entity {
    pub fn new(eid: impl Into<String>, label: impl Into<String>, name: impl Into<String>) -> Self {
        let mut properties = Properties::new();
        properties.insert(NAME_PROPERTY.into(), PropertyValue::Text(name.into()));
        Entity {
            eid: eid.into(),
            label: label.into(),
            properties,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<PropertyValue>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.properties.get(NAME_PROPERTY).and_then(|v| v.as_text())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub rid: String,
    pub label: String,
    pub subj: String,
    pub obj: String,
    pub properties: Properties,
}

impl Relation {
    pub fn new(
        rid: impl Into<String>,
        label: impl Into<String>,
        subj: impl Into<String>,
        obj: impl Into<String>,
    ) -> Self {
        Relation {
            rid: rid.into(),
            label: label.into(),
            subj: subj.into(),
            obj: obj.into(),
            properties: Properties::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<PropertyValue>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }
}

/// Dense handle of an entity inside one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

/// Dense handle of a relation inside one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Outgoing,
    Incoming,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(String),
    #[error("duplicate relation id `{0}`")]
    DuplicateRelation(String),
    #[error("relation `{rid}` references missing entity `{eid}` as {role}")]
    DanglingReference {
        rid: String,
        eid: String,
        role: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    MissingName,
    UnknownEntityLabel,
    UnknownRelationLabel,
    TripleNotInSchema,
    UnknownProperty,
    DatatypeMismatch,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::MissingName => "missing-name",
            ViolationKind::UnknownEntityLabel => "unknown-entity-label",
            ViolationKind::UnknownRelationLabel => "unknown-relation-label",
            ViolationKind::TripleNotInSchema => "triple-not-in-schema",
            ViolationKind::UnknownProperty => "unknown-property",
            ViolationKind::DatatypeMismatch => "datatype-mismatch",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// eid or rid of the offending element.
    pub id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.kind, self.id, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct PropertyGraph {
    schema: GraphSchema,
    entities: Vec<Entity>,
    relations: Vec<Relation>,
    eid_index: BTreeMap<String, EntityId>,
    rid_index: BTreeMap<String, RelationId>,
    by_label: BTreeMap<String, Vec<EntityId>>,
    by_label_name: BTreeMap<String, BTreeMap<String, Vec<EntityId>>>,
    by_name: BTreeMap<String, Vec<EntityId>>,
    rel_labels: BTreeMap<String, u32>,
    rel_label_of: Vec<u32>,
    endpoints: Vec<(EntityId, EntityId)>,
    // Per entity, incident relations sorted by (label id, relation id).
    outgoing: Vec<Vec<(u32, RelationId)>>,
    incoming: Vec<Vec<(u32, RelationId)>>,
}

impl PropertyGraph {
    /// Builds all indexes. Only structural problems (duplicate ids, dangling
    /// endpoints) are errors here; schema conformance is reported by [`validate`](Self::validate).
    pub fn assemble(
        schema: GraphSchema,
        entities: Vec<Entity>,
        relations: Vec<Relation>,
    ) -> Result<Self, GraphError> {
        let mut eid_index = BTreeMap::new();
        let mut by_label: BTreeMap<String, Vec<EntityId>> = BTreeMap::new();
        let mut by_label_name: BTreeMap<String, BTreeMap<String, Vec<EntityId>>> = BTreeMap::new();
        let mut by_name: BTreeMap<String, Vec<EntityId>> = BTreeMap::new();
        for (i, e) in entities.iter().enumerate() {
            let id = EntityId(i as u32);
            if eid_index.insert(e.eid.clone(), id).is_some() {
                return Err(GraphError::DuplicateEntity(e.eid.clone()));
            }
            by_label.entry(e.label.clone()).or_default().push(id);
            if let Some(name) = e.name() {
                by_label_name
                    .entry(e.label.clone())
                    .or_default()
                    .entry(name.into())
                    .or_default()
                    .push(id);
                by_name.entry(name.into()).or_default().push(id);
            }
        }

        let mut rid_index = BTreeMap::new();
        let mut rel_labels: BTreeMap<String, u32> = BTreeMap::new();
        for r in &relations {
            let next = rel_labels.len() as u32;
            rel_labels.entry(r.label.clone()).or_insert(next);
        }
        let mut rel_label_of = Vec::with_capacity(relations.len());
        let mut endpoints = Vec::with_capacity(relations.len());
        let mut outgoing = alloc::vec![Vec::new(); entities.len()];
        let mut incoming = alloc::vec![Vec::new(); entities.len()];
        for (i, r) in relations.iter().enumerate() {
            let id = RelationId(i as u32);
            if rid_index.insert(r.rid.clone(), id).is_some() {
                return Err(GraphError::DuplicateRelation(r.rid.clone()));
            }
            let resolve = |eid: &String, role| {
                eid_index
                    .get(eid)
                    .copied()
                    .ok_or_else(|| GraphError::DanglingReference {
                        rid: r.rid.clone(),
                        eid: eid.clone(),
                        role,
                    })
            };
            let s = resolve(&r.subj, "subject")?;
            let o = resolve(&r.obj, "object")?;
            let l = rel_labels[&r.label];
            rel_label_of.push(l);
            endpoints.push((s, o));
            outgoing[s.0 as usize].push((l, id));
            incoming[o.0 as usize].push((l, id));
        }
        for adj in outgoing.iter_mut().chain(incoming.iter_mut()) {
            adj.sort_unstable();
        }

        Ok(PropertyGraph {
            schema,
            entities,
            relations,
            eid_index,
            rid_index,
            by_label,
            by_label_name,
            by_name,
            rel_labels,
            rel_label_of,
            endpoints,
            outgoing,
            incoming,
        })
    }

    pub fn empty(schema: GraphSchema) -> Self {
        Self::assemble(schema, Vec::new(), Vec::new()).expect("empty graph is structurally valid")
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id.0 as usize]
    }

    pub fn relation(&self, id: RelationId) -> &Relation {
        &self.relations[id.0 as usize]
    }

    pub fn entity_id(&self, eid: &str) -> Option<EntityId> {
        self.eid_index.get(eid).copied()
    }

    pub fn relation_id(&self, rid: &str) -> Option<RelationId> {
        self.rid_index.get(rid).copied()
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> + '_ {
        (0..self.relations.len() as u32).map(RelationId)
    }

    pub fn endpoints(&self, id: RelationId) -> (EntityId, EntityId) {
        self.endpoints[id.0 as usize]
    }

    /// Entities carrying `label`; empty for labels absent from the data.
    pub fn entities_with_label(&self, label: &str) -> &[EntityId] {
        self.by_label.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entities_named(&self, label: Option<&str>, name: &str) -> &[EntityId] {
        let found = match label {
            Some(l) => self.by_label_name.get(l).and_then(|m| m.get(name)),
            None => self.by_name.get(name),
        };
        found.map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entity labels present in the data, sorted.
    pub fn entity_labels(&self) -> impl Iterator<Item = &str> {
        self.by_label.keys().map(String::as_str)
    }

    pub fn relation_label_id(&self, label: &str) -> Option<u32> {
        self.rel_labels.get(label).copied()
    }

    pub fn relation_label_of(&self, id: RelationId) -> u32 {
        self.rel_label_of[id.0 as usize]
    }

    /// Relations incident to `entity` in the given direction, optionally restricted to one label.
    pub fn incident(&self, entity: EntityId, dir: Direction, label: Option<u32>) -> &[(u32, RelationId)] {
        let adj = match dir {
            Direction::Outgoing => &self.outgoing[entity.0 as usize],
            Direction::Incoming => &self.incoming[entity.0 as usize],
        };
        match label {
            None => adj,
            Some(l) => {
                let lo = adj.partition_point(|(x, _)| *x < l);
                let hi = adj.partition_point(|(x, _)| *x <= l);
                &adj[lo..hi]
            }
        }
    }

    /// Exact index lookup with conjunctive optional filters; no filters returns every eid.
    pub fn lookup_entities(&self, label: Option<&str>, name: Option<&str>) -> BTreeSet<&str> {
        let ids: &[EntityId] = match (label, name) {
            (_, Some(n)) => self.entities_named(label, n),
            (Some(l), None) => self.entities_with_label(l),
            (None, None) => {
                return self.entities.iter().map(|e| e.eid.as_str()).collect();
            }
        };
        ids.iter().map(|id| self.entity(*id).eid.as_str()).collect()
    }

    /// Rebuilds every index from the raw entity and relation vectors.
    pub fn reindexed(&self) -> Self {
        Self::assemble(
            self.schema.clone(),
            self.entities.clone(),
            self.relations.clone(),
        )
        .expect("content was already structurally valid")
    }

    /// Subgraph induced by `keep`: kept entities plus every relation between them.
    pub fn induced_subgraph(&self, keep: &BTreeSet<EntityId>) -> Self {
        let entities = keep.iter().map(|id| self.entity(*id).clone()).collect();
        let relations = self
            .relation_ids()
            .filter(|r| {
                let (s, o) = self.endpoints(*r);
                keep.contains(&s) && keep.contains(&o)
            })
            .map(|r| self.relation(r).clone())
            .collect();
        Self::assemble(self.schema.clone(), entities, relations)
            .expect("induced subgraph keeps both endpoints")
    }

    pub fn into_parts(self) -> (GraphSchema, Vec<Entity>, Vec<Relation>) {
        (self.schema, self.entities, self.relations)
    }

    /// Lists every schema-conformance violation; empty iff the graph is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for e in &self.entities {
            let Some(es) = self.schema.entity(&e.label) else {
                out.push(Violation {
                    kind: ViolationKind::UnknownEntityLabel,
                    id: e.eid.clone(),
                    message: format!("entity label `{}` is not declared", e.label),
                });
                continue;
            };
            match e.properties.get(NAME_PROPERTY) {
                None => out.push(Violation {
                    kind: ViolationKind::MissingName,
                    id: e.eid.clone(),
                    message: format!("{} entity has no `name` property", e.label),
                }),
                Some(PropertyValue::Text(_)) => {}
                Some(v) => out.push(Violation {
                    kind: ViolationKind::DatatypeMismatch,
                    id: e.eid.clone(),
                    message: format!("`name` holds {} instead of str", v.datatype()),
                }),
            }
            for (k, v) in &e.properties {
                if k == NAME_PROPERTY {
                    continue;
                }
                let declared = es.properties.iter().find(|p| &p.name == k).map(|p| p.datatype);
                check_property(&mut out, &e.eid, &e.label, k, v, declared);
            }
        }
        for r in &self.relations {
            let Some(_) = self.schema.relation(&r.label) else {
                out.push(Violation {
                    kind: ViolationKind::UnknownRelationLabel,
                    id: r.rid.clone(),
                    message: format!("relation label `{}` is not declared", r.label),
                });
                continue;
            };
            let subj = &self.entity(self.eid_index[&r.subj]).label;
            let obj = &self.entity(self.eid_index[&r.obj]).label;
            if self.schema.relation_triple(&r.label, subj, obj).is_none() {
                out.push(Violation {
                    kind: ViolationKind::TripleNotInSchema,
                    id: r.rid.clone(),
                    message: format!("({subj})-[{}]->({obj}) is not declared in the schema", r.label),
                });
            }
            for (k, v) in &r.properties {
                let declared = self.schema.relation_property(&r.label, k);
                check_property(&mut out, &r.rid, &r.label, k, v, declared);
            }
        }
        out
    }
}

fn check_property(
    out: &mut Vec<Violation>,
    id: &str,
    owner: &str,
    key: &str,
    value: &PropertyValue,
    declared: Option<Datatype>,
) {
    match declared {
        None => out.push(Violation {
            kind: ViolationKind::UnknownProperty,
            id: id.into(),
            message: format!("property `{key}` is not declared on `{owner}`"),
        }),
        Some(d) if d != value.datatype() => out.push(Violation {
            kind: ViolationKind::DatatypeMismatch,
            id: id.into(),
            message: format!(
                "property `{key}` on `{owner}` holds {} but is declared {d}",
                value.datatype()
            ),
        }),
        Some(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Characteristics, EntitySchema, PropertySchema, RelationSchema};
    use alloc::vec;

    fn schema() -> GraphSchema {
        GraphSchema {
            name: "company".into(),
            entities: vec![
                EntitySchema {
                    label: "Company".into(),
                    properties: vec![PropertySchema::new("launch_year", Datatype::Int)],
                },
                EntitySchema {
                    label: "Person".into(),
                    properties: vec![],
                },
            ],
            relations: vec![RelationSchema {
                label: "hasCEO".into(),
                subj_label: "Company".into(),
                obj_label: "Person".into(),
                properties: vec![
                    PropertySchema::new("start_year", Datatype::Int),
                    PropertySchema::new("end_year", Datatype::Int),
                ],
                time_sensitive: true,
                characteristics: Characteristics::default(),
            }],
        }
        .normalize()
        .unwrap()
    }

    fn graph(entities: Vec<Entity>, relations: Vec<Relation>) -> PropertyGraph {
        PropertyGraph::assemble(schema(), entities, relations).unwrap()
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(PropertyGraph::empty(schema()).validate().is_empty());
    }

    #[test]
    fn missing_name_is_one_violation() {
        let mut e = Entity::new("c1", "Company", "x");
        e.properties.clear();
        let v = graph(vec![e], vec![]).validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::MissingName);
        assert_eq!(v[0].id, "c1");
    }

    #[test]
    fn text_in_int_relation_property_is_mismatch() {
        let g = graph(
            vec![Entity::new("c1", "Company", "AMG"), Entity::new("p1", "Person", "X")],
            vec![Relation::new("r1", "hasCEO", "c1", "p1").with("start_year", "1995")],
        );
        let v = g.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DatatypeMismatch);
        assert_eq!(v[0].id, "r1");
    }

    #[test]
    fn reversed_triple_violates_schema() {
        let g = graph(
            vec![Entity::new("c1", "Company", "AMG"), Entity::new("p1", "Person", "X")],
            vec![Relation::new("r1", "hasCEO", "p1", "c1")],
        );
        assert_eq!(g.validate()[0].kind, ViolationKind::TripleNotInSchema);
    }

    #[test]
    fn dangling_reference_is_structural_error() {
        let err = PropertyGraph::assemble(
            schema(),
            vec![Entity::new("c1", "Company", "AMG")],
            vec![Relation::new("r1", "hasCEO", "c1", "nobody")],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DanglingReference { ref rid, .. } if rid == "r1"));
    }

    #[test]
    fn lookups() {
        let g = graph(
            vec![
                Entity::new("c1", "Company", "AMG"),
                Entity::new("p1", "Person", "Same"),
                Entity::new("p2", "Person", "Same"),
            ],
            vec![],
        );
        assert_eq!(g.lookup_entities(Some("Person"), Some("Same")).len(), 2);
        assert!(g.lookup_entities(Some("NoSuchType"), None).is_empty());
        assert_eq!(g.lookup_entities(None, None).len(), 3);
        assert_eq!(
            g.lookup_entities(Some("Company"), Some("AMG")).into_iter().collect::<Vec<_>>(),
            vec!["c1"]
        );
    }

    #[test]
    fn incident_by_label() {
        let g = graph(
            vec![Entity::new("c1", "Company", "AMG"), Entity::new("p1", "Person", "X")],
            vec![Relation::new("r1", "hasCEO", "c1", "p1")],
        );
        let c1 = g.entity_id("c1").unwrap();
        let l = g.relation_label_id("hasCEO");
        assert_eq!(g.incident(c1, Direction::Outgoing, l).len(), 1);
        assert_eq!(g.incident(c1, Direction::Incoming, l).len(), 0);
    }
}
