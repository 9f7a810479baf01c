use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::convert::Infallible;
use core::fmt;

use super::statement::{Rank, RawValue, Statement};

/// Predicate linking an item to its type.
pub const INSTANCE_OF: &str = "P31";
/// Predicate carrying an item's display name in statement files.
pub const LABEL: &str = "rdfs:label";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Instance {
    pub id: String,
    pub label: Option<String>,
}

/// Where statements come from. Results are sorted by id so that every
/// implementation yields the same graph for the same data.
pub trait StatementSource {
    type Error: fmt::Display;

    /// Items with a non-deprecated instance-of statement pointing at `type_id`.
    fn instances_of(&self, type_id: &str) -> Result<Vec<Instance>, Self::Error>;

    /// `predicate` statements of every rank whose subject is an instance of
    /// `subj_type` and whose object is an instance of `obj_type`. Only the
    /// listed qualifiers are attached.
    fn relation_statements(
        &self,
        subj_type: &str,
        predicate: &str,
        obj_type: &str,
        qualifiers: &[&str],
    ) -> Result<Vec<Statement>, Self::Error>;

    /// `predicate` statements of every rank on instances of `type_id`.
    fn property_statements(&self, type_id: &str, predicate: &str) -> Result<Vec<Statement>, Self::Error>;

    /// Rows the source could not decode and skipped.
    fn malformed_rows(&self) -> usize {
        0
    }
}

/// Statements held in memory, e.g. loaded from a JSONL file.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    statements: Vec<Statement>,
    labels: BTreeMap<String, String>,
    types: BTreeMap<String, BTreeSet<String>>,
}

impl MemorySource {
    pub fn new(mut statements: Vec<Statement>, language: &str) -> Self {
        statements.sort_by(|a, b| a.id.cmp(&b.id));
        let mut labels: BTreeMap<String, (u8, String)> = BTreeMap::new();
        let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for s in &statements {
            if s.predicate == LABEL {
                let (pri, text) = match &s.value {
                    RawValue::Monolingual { text, lang } if lang == language => (0, text),
                    RawValue::Text { text } => (1, text),
                    _ => continue,
                };
                match labels.get(&s.subject) {
                    Some((p, _)) if *p <= pri => {}
                    _ => {
                        labels.insert(s.subject.clone(), (pri, text.clone()));
                    }
                }
            } else if s.predicate == INSTANCE_OF && s.rank != Rank::Deprecated {
                if let RawValue::Entity { id, .. } = &s.value {
                    types.entry(id.clone()).or_default().insert(s.subject.clone());
                }
            }
        }
        MemorySource {
            statements,
            labels: labels.into_iter().map(|(k, (_, v))| (k, v)).collect(),
            types,
        }
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn label(&self, id: &str) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    fn is_instance(&self, id: &str, type_id: &str) -> bool {
        self.types.get(type_id).is_some_and(|s| s.contains(id))
    }

    fn with_labels(&self, s: &Statement) -> Statement {
        let mut s = s.clone();
        if let RawValue::Entity { id, label } = &mut s.value {
            if label.is_none() {
                *label = self.labels.get(id).cloned();
            }
        }
        for q in &mut s.qualifiers {
            if let RawValue::Entity { id, label } = &mut q.value {
                if label.is_none() {
                    *label = self.labels.get(id).cloned();
                }
            }
        }
        s
    }
}

impl StatementSource for MemorySource {
    type Error = Infallible;

    fn instances_of(&self, type_id: &str) -> Result<Vec<Instance>, Infallible> {
        Ok(self
            .types
            .get(type_id)
            .into_iter()
            .flatten()
            .map(|id| Instance {
                id: id.clone(),
                label: self.labels.get(id).cloned(),
            })
            .collect())
    }

    fn relation_statements(
        &self,
        subj_type: &str,
        predicate: &str,
        obj_type: &str,
        qualifiers: &[&str],
    ) -> Result<Vec<Statement>, Infallible> {
        Ok(self
            .statements
            .iter()
            .filter(|s| s.predicate == predicate && self.is_instance(&s.subject, subj_type))
            .filter(|s| matches!(&s.value, RawValue::Entity { id, .. } if self.is_instance(id, obj_type)))
            .map(|s| {
                let mut s = self.with_labels(s);
                s.qualifiers.retain(|q| qualifiers.contains(&q.property.as_str()));
                s
            })
            .collect())
    }

    fn property_statements(&self, type_id: &str, predicate: &str) -> Result<Vec<Statement>, Infallible> {
        Ok(self
            .statements
            .iter()
            .filter(|s| s.predicate == predicate && self.is_instance(&s.subject, type_id))
            .map(|s| {
                let mut s = self.with_labels(s);
                s.qualifiers.clear();
                s
            })
            .collect())
    }
}
