//! Result tables and the canonical cell serialization used by the metrics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::value::Date;

/// One result value. Node and relation objects only appear when a query
/// returns them directly; they carry a rendered description.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Date(Date),
    List(Vec<Cell>),
    Node(String),
    Relation(String),
}

impl Cell {
    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    pub fn is_object(&self) -> bool {
        match self {
            Cell::Node(_) | Cell::Relation(_) => true,
            Cell::List(items) => items.iter().any(Cell::is_object),
            _ => false,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }
}

pub const NULL_TEXT: &str = "∅";

/// Canonical text of a cell. Lists serialize order-insensitively.
pub fn serialize_cell(c: &Cell) -> String {
    let mut out = String::new();
    write_cell(&mut out, c);
    out
}

fn write_cell(out: &mut String, c: &Cell) {
    match c {
        Cell::Null => out.push_str(NULL_TEXT),
        Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Cell::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Cell::Float(x) => {
            let _ = write!(out, "{x}");
        }
        Cell::Text(s) | Cell::Node(s) | Cell::Relation(s) => out.push_str(s),
        Cell::Date(d) => {
            let _ = write!(out, "{d}");
        }
        Cell::List(items) => {
            let mut parts: Vec<String> = items.iter().map(serialize_cell).collect();
            parts.sort();
            out.push('[');
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(p);
            }
            out.push(']');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[i])
    }

    /// Rows rendered through [`serialize_cell`], handy for comparisons in tests.
    pub fn serialized_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(serialize_cell).collect())
            .collect()
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Null => s.serialize_unit(),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Float(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Float(x) => s.serialize_str(&x.to_string()),
            Cell::Text(t) | Cell::Node(t) | Cell::Relation(t) => s.serialize_str(t),
            Cell::Date(d) => s.collect_str(d),
            Cell::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for c in items {
                    seq.serialize_element(c)?;
                }
                seq.end()
            }
        }
    }
}

struct CellVisitor;

impl<'de> Visitor<'de> for CellVisitor {
    type Value = Cell;

    fn expecting(&self, f: &mut core::fmt::Formatter) -> core::fmt::Result {
        f.write_str("null, a boolean, a number, a string or an array")
    }

    fn visit_unit<E: de::Error>(self) -> Result<Cell, E> {
        Ok(Cell::Null)
    }

    fn visit_none<E: de::Error>(self) -> Result<Cell, E> {
        Ok(Cell::Null)
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<Cell, E> {
        Ok(Cell::Bool(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cell, E> {
        Ok(Cell::Int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cell, E> {
        Ok(i64::try_from(v).map(Cell::Int).unwrap_or(Cell::Float(v as f64)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cell, E> {
        Ok(Cell::Float(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Cell, E> {
        Ok(Cell::Text(v.into()))
    }

    fn visit_string<E: de::Error>(self, v: String) -> Result<Cell, E> {
        Ok(Cell::Text(v))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Cell, A::Error> {
        let mut items = Vec::new();
        while let Some(c) = seq.next_element()? {
            items.push(c);
        }
        Ok(Cell::List(items))
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(CellVisitor)
    }
}
