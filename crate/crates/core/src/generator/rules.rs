//! Realism rules over declared relation characteristics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

use super::pattern::{EdgeSlot, MatchInstance};
use crate::schema::{Characteristics, GraphSchema, Participation};
use crate::task::PatternId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    /// Grouping over a relation that gives each group at most one member.
    R1,
    /// A two-hop path that goes out and back over a functional relation.
    R2,
    /// An existence test that every answer entity satisfies.
    R3,
    /// Two conditions on the same endpoints where one implies the other.
    R4,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    characteristics: BTreeMap<String, Characteristics>,
    /// Transitive closure of declared `entails` edges.
    entails: BTreeMap<String, BTreeSet<String>>,
}

impl RuleSet {
    pub fn from_schema(schema: &GraphSchema) -> Self {
        let mut characteristics = BTreeMap::new();
        let mut entails: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in &schema.relations {
            characteristics
                .entry(r.label.clone())
                .or_insert_with(|| r.characteristics.clone());
            entails
                .entry(r.label.clone())
                .or_default()
                .extend(r.characteristics.entails.iter().cloned());
        }
        loop {
            let mut grew = false;
            let snapshot = entails.clone();
            for targets in entails.values_mut() {
                let reach: BTreeSet<String> = targets
                    .iter()
                    .flat_map(|t| snapshot.get(t).into_iter().flatten().cloned())
                    .collect();
                for t in reach {
                    grew |= targets.insert(t);
                }
            }
            if !grew {
                break;
            }
        }
        RuleSet {
            characteristics,
            entails,
        }
    }

    pub fn characteristics(&self, label: &str) -> Characteristics {
        self.characteristics.get(label).cloned().unwrap_or_default()
    }

    pub fn entails(&self, a: &str, b: &str) -> bool {
        self.entails.get(a).is_some_and(|s| s.contains(b))
    }

    /// Members per group when grouping `group` over `e` are at most one.
    fn single_member(&self, e: &EdgeSlot, group: usize) -> bool {
        let c = self.characteristics(&e.label).cardinality;
        if e.subj == group {
            c.single_object_per_subject()
        } else {
            c.single_subject_per_object()
        }
    }

    fn redundant(&self, a: &EdgeSlot, b: &EdgeSlot) -> bool {
        a.label == b.label || self.entails(&a.label, &b.label) || self.entails(&b.label, &a.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub rule: Rule,
    pub detail: String,
}

fn reject(rule: Rule, detail: String) -> Result<(), Rejection> {
    Err(Rejection { rule, detail })
}

/// Accepts or rejects an instantiated pattern. Rules that depend on names
/// (R4 across two named endpoints) only fire once names are filled in.
pub fn check_realisticness(m: &MatchInstance, rules: &RuleSet) -> Result<(), Rejection> {
    use PatternId::*;
    match m.pattern {
        GroupBy | OptionalMatch => {
            let e = &m.edges[0];
            if rules.single_member(e, 0) {
                return reject(Rule::R1, alloc::format!("each {} has at most one {} member", m.nodes[0].label, e.label));
            }
        }
        _ => {}
    }
    if matches!(m.pattern, Basic5 | GroupBy) {
        let (e0, e1) = (&m.edges[0], &m.edges[1]);
        if e0.label == e1.label {
            let c = rules.characteristics(&e0.label).cardinality;
            let both_in = e0.obj == 1 && e1.obj == 1;
            let both_out = e0.subj == 1 && e1.subj == 1;
            if (both_in && c.single_subject_per_object()) || (both_out && c.single_object_per_subject()) {
                return reject(Rule::R2, alloc::format!("{} traversed out and back through a functional side", e0.label));
            }
        }
    }
    if m.pattern == Basic3 {
        let e = &m.edges[0];
        let c = rules.characteristics(&e.label);
        let side = if e.subj == 0 { c.subj_participation } else { c.obj_participation };
        if side == Participation::Total {
            return reject(Rule::R3, alloc::format!("every {} takes part in {}", m.nodes[0].label, e.label));
        }
    }
    let same_endpoint = match m.pattern {
        Basic7 => true,
        Basic6 | Union => m.nodes[1].label == m.nodes[2].label && m.nodes[1].name.is_some() && m.nodes[1].name == m.nodes[2].name,
        _ => false,
    };
    if same_endpoint {
        let (e0, e1) = (&m.edges[0], &m.edges[1]);
        if (e0.subj == 0) == (e1.subj == 0) && rules.redundant(e0, e1) {
            return reject(Rule::R4, alloc::format!("{} and {} on the same endpoints", e0.label, e1.label));
        }
    }
    Ok(())
}
