//! Declared property-graph schema, including the relationship characteristics
//! consulted by the task generator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::value::Datatype;

pub const NAME_PROPERTY: &str = "name";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySchema {
    pub name: String,
    pub datatype: Datatype,
}

impl PropertySchema {
    pub fn new(name: impl Into<String>, datatype: Datatype) -> Self {
        PropertySchema {
            name: name.into(),
            datatype,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySchema {
    pub label: String,
    #[serde(default)]
    pub properties: Vec<PropertySchema>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Cardinality {
    #[serde(rename = "one-one")]
    OneOne,
    #[serde(rename = "one-many")]
    OneMany,
    #[serde(rename = "many-one")]
    ManyOne,
    #[default]
    #[serde(rename = "many-many")]
    ManyMany,
}

impl Cardinality {
    /// Every subject is linked to at most one object.
    pub fn single_object_per_subject(self) -> bool {
        matches!(self, Cardinality::OneOne | Cardinality::ManyOne)
    }

    /// Every object is linked to at most one subject.
    pub fn single_subject_per_object(self) -> bool {
        matches!(self, Cardinality::OneOne | Cardinality::OneMany)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Participation {
    Total,
    #[default]
    Partial,
}

/// Declared metadata. Never enforced against data.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Characteristics {
    #[serde(default)]
    pub cardinality: Cardinality,
    #[serde(default)]
    pub subj_participation: Participation,
    #[serde(default)]
    pub obj_participation: Participation,
    #[serde(default)]
    pub entails: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub label: String,
    pub subj_label: String,
    pub obj_label: String,
    #[serde(default)]
    pub properties: Vec<PropertySchema>,
    #[serde(default)]
    pub time_sensitive: bool,
    #[serde(default)]
    pub characteristics: Characteristics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub name: String,
    #[serde(default)]
    pub entities: Vec<EntitySchema>,
    #[serde(default)]
    pub relations: Vec<RelationSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("entity label `{0}` declared more than once")]
    DuplicateEntityLabel(String),
    #[error("relation triple ({1})-[{0}]->({2}) declared more than once")]
    DuplicateRelation(String, String, String),
    #[error("relation `{relation}` references undeclared entity label `{label}`")]
    UndeclaredEndpoint { relation: String, label: String },
    #[error("property `{property}` declared twice on `{owner}`")]
    DuplicateProperty { owner: String, property: String },
    #[error("`name` on entity `{0}` must have datatype str")]
    NameNotText(String),
    #[error("relation `{relation}` entails undeclared relation `{target}`")]
    UnknownEntailment { relation: String, target: String },
    #[error("relation `{0}` is declared with different properties or characteristics across triples")]
    InconsistentRelation(String),
}

impl GraphSchema {
    pub fn empty(name: impl Into<String>) -> Self {
        GraphSchema {
            name: name.into(),
            entities: Vec::new(),
            relations: Vec::new(),
        }
    }

    /// Checks label uniqueness and cross references, and makes sure every entity
    /// schema declares `name: str` (adding it when absent).
    pub fn normalize(mut self) -> Result<Self, SchemaError> {
        let mut seen = BTreeSet::new();
        for e in &mut self.entities {
            if !seen.insert(e.label.clone()) {
                return Err(SchemaError::DuplicateEntityLabel(e.label.clone()));
            }
            check_unique_props(&e.label, &e.properties)?;
            match e.properties.iter().find(|p| p.name == NAME_PROPERTY) {
                Some(p) if p.datatype != Datatype::Str => {
                    return Err(SchemaError::NameNotText(e.label.clone()))
                }
                Some(_) => {}
                None => e
                    .properties
                    .insert(0, PropertySchema::new(NAME_PROPERTY, Datatype::Str)),
            }
        }
        let mut triples = BTreeSet::new();
        let mut by_label: BTreeMap<&str, &RelationSchema> = BTreeMap::new();
        for r in &self.relations {
            for l in [&r.subj_label, &r.obj_label] {
                if !seen.contains(l) {
                    return Err(SchemaError::UndeclaredEndpoint {
                        relation: r.label.clone(),
                        label: l.clone(),
                    });
                }
            }
            if !triples.insert((&r.label, &r.subj_label, &r.obj_label)) {
                return Err(SchemaError::DuplicateRelation(
                    r.label.clone(),
                    r.subj_label.clone(),
                    r.obj_label.clone(),
                ));
            }
            check_unique_props(&r.label, &r.properties)?;
            if let Some(prev) = by_label.insert(&r.label, r) {
                if prev.properties != r.properties
                    || prev.time_sensitive != r.time_sensitive
                    || prev.characteristics != r.characteristics
                {
                    return Err(SchemaError::InconsistentRelation(r.label.clone()));
                }
            }
        }
        for r in &self.relations {
            for t in &r.characteristics.entails {
                if !by_label.contains_key(t.as_str()) {
                    return Err(SchemaError::UnknownEntailment {
                        relation: r.label.clone(),
                        target: t.clone(),
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn entity(&self, label: &str) -> Option<&EntitySchema> {
        self.entities.iter().find(|e| e.label == label)
    }

    /// Any declared triple carrying this relation label.
    pub fn relation(&self, label: &str) -> Option<&RelationSchema> {
        self.relations.iter().find(|r| r.label == label)
    }

    pub fn relation_triple(&self, label: &str, subj: &str, obj: &str) -> Option<&RelationSchema> {
        self.relations
            .iter()
            .find(|r| r.label == label && r.subj_label == subj && r.obj_label == obj)
    }

    pub fn entity_property(&self, label: &str, property: &str) -> Option<Datatype> {
        self.entity(label)?
            .properties
            .iter()
            .find(|p| p.name == property)
            .map(|p| p.datatype)
    }

    pub fn relation_property(&self, label: &str, property: &str) -> Option<Datatype> {
        self.relation(label)?
            .properties
            .iter()
            .find(|p| p.name == property)
            .map(|p| p.datatype)
    }

    /// Distinct relation labels in declaration order.
    pub fn relation_labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.relations {
            if !out.contains(&r.label.as_str()) {
                out.push(&r.label);
            }
        }
        out
    }

    /// Declared property count over entity and relation types (relation labels counted once).
    pub fn property_count(&self) -> usize {
        let ent: usize = self.entities.iter().map(|e| e.properties.len()).sum();
        let rel: usize = self
            .relation_labels()
            .into_iter()
            .filter_map(|l| self.relation(l))
            .map(|r| r.properties.len())
            .sum();
        ent + rel
    }
}

fn check_unique_props(owner: &str, props: &[PropertySchema]) -> Result<(), SchemaError> {
    let mut seen = BTreeSet::new();
    for p in props {
        if !seen.insert(p.name.as_str()) {
            return Err(SchemaError::DuplicateProperty {
                owner: owner.into(),
                property: p.name.clone(),
            });
        }
    }
    Ok(())
}
