use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::config::{ConfigError, MappingConfig, PropertyMapping, RelationMapping};
use super::convert::convert_property_value;
use super::rank::select_by_rank;
use super::source::StatementSource;
use super::statement::{Qualifier, RawValue, Statement};
use super::units::UnitTable;
use crate::graph::{Entity, GraphError, Properties, PropertyGraph, Relation, Violation};
use crate::value::{Datatype, PropertyValue};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub fetched: usize,
    pub kept: usize,
    #[serde(default)]
    pub discarded: BTreeMap<String, usize>,
}

impl Counts {
    fn discard(&mut self, reason: &str) {
        *self.discarded.entry(reason.into()).or_default() += 1;
    }

    pub fn discarded_total(&self) -> usize {
        self.discarded.values().sum()
    }

    fn merge(&mut self, other: Counts) {
        self.fetched += other.fetched;
        self.kept += other.kept;
        for (k, v) in other.discarded {
            *self.discarded.entry(k).or_default() += v;
        }
    }
}

/// Per-label and per-property bookkeeping; `kept + discarded == fetched` everywhere.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformStats {
    pub entities: BTreeMap<String, Counts>,
    pub relations: BTreeMap<String, Counts>,
    /// Keyed by `Label.property`, covering entity properties and relation qualifiers.
    pub properties: BTreeMap<String, Counts>,
    pub malformed_rows: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError<E> {
    #[error("statement source failed: {0}")]
    Source(E),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("transformed graph violates its schema: {}", .0.first().map(|v| format!("{v}")).unwrap_or_default())]
    Invalid(Vec<Violation>),
}

fn group_by_subject(stmts: &[Statement]) -> BTreeMap<&str, Vec<&Statement>> {
    let mut g: BTreeMap<&str, Vec<&Statement>> = BTreeMap::new();
    for s in stmts {
        g.entry(s.subject.as_str()).or_default().push(s);
    }
    g
}

/// Statements of `rel` that survive rank filtering, sorted by statement id.
/// Rank groups are formed per subject.
pub fn fetch_conforming_relations<S: StatementSource>(
    src: &S,
    subj_type: &str,
    obj_type: &str,
    rel: &RelationMapping,
) -> Result<(Vec<Statement>, Counts), S::Error> {
    let qualifiers: Vec<&str> = rel.properties.iter().map(|p| p.wd_source.as_str()).collect();
    let fetched = src.relation_statements(subj_type, &rel.wd_source, obj_type, &qualifiers)?;
    let mut counts = Counts {
        fetched: fetched.len(),
        ..Counts::default()
    };
    let (good, bad): (Vec<Statement>, Vec<Statement>) = fetched
        .into_iter()
        .partition(|s| s.predicate == rel.wd_source && matches!(s.value, RawValue::Entity { .. }));
    for _ in &bad {
        counts.discard("malformed");
    }
    let mut kept: Vec<Statement> = Vec::new();
    for group in group_by_subject(&good).values() {
        let sel = select_by_rank(group, rel.time_sensitive);
        for _ in 0..group.len() - sel.len() {
            counts.discard("rank");
        }
        kept.extend(sel.into_iter().cloned());
    }
    kept.sort_by(|a, b| a.id.cmp(&b.id));
    counts.kept = kept.len();
    Ok((kept, counts))
}

fn object_id(s: &Statement) -> &str {
    match &s.value {
        RawValue::Entity { id, .. } => id,
        _ => "",
    }
}

/// Converts the values in `raws` (already in statement order) for one property.
/// List properties gather every convertible value; others keep the first.
fn convert_values<'a>(
    raws: impl Iterator<Item = &'a RawValue>,
    spec: &PropertyMapping,
    units: &UnitTable,
    counts: &mut Counts,
) -> Option<PropertyValue> {
    let mut out: Option<PropertyValue> = None;
    for raw in raws {
        counts.fetched += 1;
        match convert_property_value(raw, spec, units) {
            Err(reason) => counts.discard(reason.as_str()),
            Ok(v) => match (&mut out, v) {
                (None, v) => {
                    counts.kept += 1;
                    out = Some(v);
                }
                (Some(PropertyValue::ListText(acc)), PropertyValue::ListText(more)) => {
                    counts.kept += 1;
                    for m in more {
                        if !acc.contains(&m) {
                            acc.push(m);
                        }
                    }
                }
                _ => counts.discard("superseded"),
            },
        }
    }
    out
}

fn qualifier_values<'a>(qs: &'a [Qualifier], pid: &'a str) -> impl Iterator<Item = &'a RawValue> {
    qs.iter().filter(move |q| q.property == pid).map(|q| &q.value)
}

pub fn build_graph<S: StatementSource>(
    cfg: &MappingConfig,
    src: &S,
    units: &UnitTable,
) -> Result<(PropertyGraph, TransformStats), BuildError<S::Error>> {
    let schema = cfg.schema()?;
    let mut stats = TransformStats::default();

    // Candidate entities: first mapped label wins for items typed more than once.
    let mut label_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    for (li, em) in cfg.entities.iter().enumerate() {
        let counts = stats.entities.entry(em.label.clone()).or_default();
        for inst in src.instances_of(&em.wd_source).map_err(BuildError::Source)? {
            counts.fetched += 1;
            let Some(name) = inst.label else {
                counts.discard("missing-name");
                continue;
            };
            if label_of.contains_key(&inst.id) {
                counts.discard("duplicate-id");
                continue;
            }
            label_of.insert(inst.id.clone(), li);
            names.insert(inst.id, name);
        }
    }
    let label_index = |label: &str| cfg.entities.iter().position(|e| e.label == label);

    let mut relations: Vec<Relation> = Vec::new();
    let mut connected: BTreeSet<String> = BTreeSet::new();
    for rm in &cfg.relations {
        let (Some(si), Some(oi)) = (label_index(&rm.subj_label), label_index(&rm.obj_label)) else {
            continue;
        };
        let (subj_type, obj_type) = (&cfg.entities[si].wd_source, &cfg.entities[oi].wd_source);
        let (kept, mut counts) =
            fetch_conforming_relations(src, subj_type, obj_type, rm).map_err(BuildError::Source)?;
        for s in kept {
            let obj = object_id(&s);
            if label_of.get(&s.subject) != Some(&si) || label_of.get(obj) != Some(&oi) {
                counts.kept -= 1;
                counts.discard("missing-endpoint");
                continue;
            }
            let mut properties = Properties::new();
            for pm in &rm.properties {
                let pc = stats.properties.entry(format!("{}.{}", rm.label, pm.label)).or_default();
                if let Some(v) = convert_values(qualifier_values(&s.qualifiers, &pm.wd_source), pm, units, pc) {
                    properties.insert(pm.label.clone(), v);
                }
            }
            connected.insert(s.subject.clone());
            connected.insert(obj.into());
            relations.push(Relation {
                rid: s.id.clone(),
                label: rm.label.clone(),
                subj: s.subject.clone(),
                obj: obj.into(),
                properties,
            });
        }
        stats.relations.entry(rm.label.clone()).or_default().merge(counts);
    }

    let mut per_label: Vec<Vec<String>> = alloc::vec![Vec::new(); cfg.entities.len()];
    for (eid, &li) in &label_of {
        if cfg.entities[li].fetch_only_connected && !connected.contains(eid) {
            stats.entities.get_mut(&cfg.entities[li].label).unwrap().discard("not-connected");
            continue;
        }
        per_label[li].push(eid.clone());
    }

    let mut entities: Vec<Entity> = Vec::new();
    for (li, em) in cfg.entities.iter().enumerate() {
        let ids = &per_label[li];
        stats.entities.get_mut(&em.label).unwrap().kept += ids.len();
        let start = entities.len();
        for eid in ids {
            entities.push(Entity::new(eid.clone(), em.label.clone(), names[eid].clone()));
        }
        let slot: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, e)| (e.as_str(), start + i)).collect();
        for pm in &em.properties {
            let stmts = src
                .property_statements(&em.wd_source, &pm.wd_source)
                .map_err(BuildError::Source)?;
            let counts = stats.properties.entry(format!("{}.{}", em.label, pm.label)).or_default();
            let mut stmts: Vec<Statement> = stmts.into_iter().filter(|s| s.predicate == pm.wd_source).collect();
            stmts.sort_by(|a, b| a.id.cmp(&b.id));
            for (subject, group) in group_by_subject(&stmts) {
                let Some(&at) = slot.get(subject) else {
                    counts.fetched += group.len();
                    for _ in &group {
                        counts.discard("unknown-subject");
                    }
                    continue;
                };
                let sel = select_by_rank(&group, false);
                counts.fetched += group.len() - sel.len();
                for _ in 0..group.len() - sel.len() {
                    counts.discard("rank");
                }
                if let Some(v) = convert_values(sel.iter().map(|s| &s.value), pm, units, counts) {
                    entities[at].properties.insert(pm.label.clone(), v);
                }
            }
        }
    }
    stats.malformed_rows = src.malformed_rows();

    debug_assert!(entities
        .iter()
        .all(|e| e.properties.get("name").map(PropertyValue::datatype) == Some(Datatype::Str)));
    let g = PropertyGraph::assemble(schema, entities, relations)?;
    let violations = g.validate();
    if !violations.is_empty() {
        return Err(BuildError::Invalid(violations));
    }
    Ok((g, stats))
}
