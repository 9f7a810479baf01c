//! MATCH-prefix extraction and the provenance subgraph it binds.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use super::ast::{Clause, Projection, Query};
use super::exec::{execute_bindings, ExecError};
use super::runtime::Value;
use crate::budget::Budget;
use crate::graph::{EntityId, PropertyGraph, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyPrefix;

impl fmt::Display for EmptyPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("query does not start with a MATCH clause")
    }
}

impl core::error::Error for EmptyPrefix {}

/// The leading run of MATCH / OPTIONAL MATCH (with their WHERE) and CALL
/// blocks, closed with `RETURN *`.
pub fn extract_match_prefix(q: &Query) -> Result<Query, EmptyPrefix> {
    let mut clauses: Vec<Clause> = q
        .clauses
        .iter()
        .take_while(|c| matches!(c, Clause::Match(_) | Clause::CallUnion(_)))
        .cloned()
        .collect();
    if clauses.is_empty() {
        return Err(EmptyPrefix);
    }
    clauses.push(Clause::Return(Projection {
        star: true,
        ..Projection::default()
    }));
    Ok(Query { clauses })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphElement {
    Entity(EntityId),
    Relation(RelationId),
}

fn collect(v: &Value, out: &mut BTreeSet<GraphElement>) {
    match v {
        Value::Node(id) => {
            out.insert(GraphElement::Entity(*id));
        }
        Value::Rel(id) => {
            out.insert(GraphElement::Relation(*id));
        }
        Value::List(items) => items.iter().for_each(|x| collect(x, out)),
        _ => {}
    }
}

/// Every entity and relation bound in any row of `prefix`, anonymous
/// pattern elements included.
pub fn provenance(prefix: &Query, g: &PropertyGraph, budget: &Budget) -> Result<BTreeSet<GraphElement>, ExecError> {
    let (_, rows) = execute_bindings(prefix, g, budget)?;
    let mut out = BTreeSet::new();
    for row in &rows {
        for v in row {
            collect(v, &mut out);
        }
    }
    Ok(out)
}
