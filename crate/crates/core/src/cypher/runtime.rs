//! Values flowing between clauses during execution, with Cypher's equality,
//! comparison and orderability rules.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use super::ast::write_string_literal;
use super::table::Cell;
use crate::graph::{EntityId, Properties, PropertyGraph, RelationId};
use crate::value::{Date, PropertyValue};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Date(Date),
    List(Vec<Value>),
    Node(EntityId),
    Rel(RelationId),
}

impl From<&PropertyValue> for Value {
    fn from(p: &PropertyValue) -> Self {
        match p {
            PropertyValue::Text(s) => Value::Text(s.clone()),
            PropertyValue::Int(i) => Value::Int(*i),
            PropertyValue::Float(x) => Value::Float(*x),
            PropertyValue::Date(d) => Value::Date(*d),
            PropertyValue::ListText(l) => Value::List(l.iter().map(|s| Value::Text(s.clone())).collect()),
        }
    }
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Float(_) => "float",
            Value::Text(_) => "string",
            Value::Date(_) => "date",
            Value::List(_) => "list",
            Value::Node(_) => "node",
            Value::Rel(_) => "relationship",
        }
    }

    /// Converts to a result cell, rendering graph objects through `g`.
    pub fn to_cell(&self, g: &PropertyGraph) -> Cell {
        match self {
            Value::Null => Cell::Null,
            Value::Bool(b) => Cell::Bool(*b),
            Value::Int(i) => Cell::Int(*i),
            Value::Float(x) => Cell::Float(*x),
            Value::Text(s) => Cell::Text(s.clone()),
            Value::Date(d) => Cell::Date(*d),
            Value::List(items) => Cell::List(items.iter().map(|v| v.to_cell(g)).collect()),
            Value::Node(id) => {
                let e = g.entity(*id);
                let mut s = format!("(:{}", e.label);
                write_props(&mut s, &e.properties);
                s.push(')');
                Cell::Node(s)
            }
            Value::Rel(id) => {
                let r = g.relation(*id);
                let mut s = format!("[:{}", r.label);
                write_props(&mut s, &r.properties);
                s.push(']');
                Cell::Relation(s)
            }
        }
    }
}

fn write_props(out: &mut String, props: &Properties) {
    if props.is_empty() {
        return;
    }
    out.push_str(" {");
    for (i, (k, v)) in props.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{k}: ");
        write_property(out, v);
    }
    out.push('}');
}

fn write_property(out: &mut String, v: &PropertyValue) {
    let _ = match v {
        PropertyValue::Text(s) => write_string_literal(out, s),
        PropertyValue::Int(i) => write!(out, "{i}"),
        PropertyValue::Float(x) => write!(out, "{x:?}"),
        PropertyValue::Date(d) => write!(out, "date('{d}')"),
        PropertyValue::ListText(items) => {
            out.push('[');
            for (i, s) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write_string_literal(out, s);
            }
            out.push(']');
            Ok(())
        }
    };
}

/// Exact comparison of an integer with a float.
pub fn cmp_int_float(i: i64, f: f64) -> Option<Ordering> {
    if f.is_nan() {
        return None;
    }
    // 2^63; `i64::MAX as f64` rounds up to it.
    let bound = i64::MAX as f64;
    if f >= bound {
        return Some(Ordering::Less);
    }
    if f < -bound {
        return Some(Ordering::Greater);
    }
    let t = libm::trunc(f);
    match i.cmp(&(t as i64)) {
        Ordering::Equal => 0.0f64.partial_cmp(&(f - t)),
        o => Some(o),
    }
}

fn cmp_numbers(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
        (Value::Float(x), Value::Float(y)) => x.partial_cmp(y),
        (Value::Int(x), Value::Float(y)) => cmp_int_float(*x, *y),
        (Value::Float(x), Value::Int(y)) => cmp_int_float(*y, *x).map(Ordering::reverse),
        _ => None,
    }
}

/// Ternary equality: `None` stands for null.
pub fn equals(a: &Value, b: &Value) -> Option<bool> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => None,
        (Value::Int(_) | Value::Float(_), Value::Int(_) | Value::Float(_)) => {
            Some(cmp_numbers(a, b) == Some(Ordering::Equal))
        }
        (Value::Bool(x), Value::Bool(y)) => Some(x == y),
        (Value::Text(x), Value::Text(y)) => Some(x == y),
        (Value::Date(x), Value::Date(y)) => Some(x == y),
        (Value::Node(x), Value::Node(y)) => Some(x == y),
        (Value::Rel(x), Value::Rel(y)) => Some(x == y),
        (Value::List(x), Value::List(y)) => {
            if x.len() != y.len() {
                return Some(false);
            }
            let mut saw_null = false;
            for (p, q) in x.iter().zip(y) {
                match equals(p, q) {
                    Some(false) => return Some(false),
                    None => saw_null = true,
                    Some(true) => {}
                }
            }
            if saw_null {
                None
            } else {
                Some(true)
            }
        }
        _ => Some(false),
    }
}

/// Ordering comparison for `<`, `<=`, `>`, `>=`; `None` when the operands are
/// not comparable (including any null).
pub fn compare(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Int(_) | Value::Float(_), Value::Int(_) | Value::Float(_)) => cmp_numbers(a, b),
        (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
        (Value::Date(x), Value::Date(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Node(_) => 0,
        Value::Rel(_) => 1,
        Value::List(_) => 2,
        Value::Date(_) => 3,
        Value::Text(_) => 4,
        Value::Bool(_) => 5,
        Value::Int(_) | Value::Float(_) => 6,
        Value::Null => 7,
    }
}

/// Total order used by ORDER BY, min/max, grouping and DISTINCT.
/// Null sorts after everything; NaN after every other number.
pub fn order_cmp(a: &Value, b: &Value) -> Ordering {
    let (ra, rb) = (rank(a), rank(b));
    if ra != rb {
        return ra.cmp(&rb);
    }
    match (a, b) {
        (Value::Node(x), Value::Node(y)) => x.cmp(y),
        (Value::Rel(x), Value::Rel(y)) => x.cmp(y),
        (Value::List(x), Value::List(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = order_cmp(p, q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        (Value::Date(x), Value::Date(y)) => x.cmp(y),
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Null, Value::Null) => Ordering::Equal,
        _ => {
            let nan = |v: &Value| matches!(v, Value::Float(f) if f.is_nan());
            match (nan(a), nan(b)) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                (false, false) => cmp_numbers(a, b).unwrap_or(Ordering::Equal),
            }
        }
    }
}

/// Wrapper giving [`Value`] the [`order_cmp`] total order.
#[derive(Debug, Clone)]
pub struct Ordered(pub Value);

impl PartialEq for Ordered {
    fn eq(&self, other: &Self) -> bool {
        order_cmp(&self.0, &other.0) == Ordering::Equal
    }
}

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> Ordering {
        order_cmp(&self.0, &other.0)
    }
}

pub fn row_key(row: &[Value]) -> Vec<Ordered> {
    row.iter().cloned().map(Ordered).collect()
}
