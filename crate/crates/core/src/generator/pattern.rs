//! The MATCH pattern catalog and its Cypher rendering.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::cypher::ast::{ident, write_string_literal};
use crate::schema::GraphSchema;
use crate::task::PatternId;

#[derive(Debug, Clone, Copy)]
pub struct NodeRole {
    pub var: &'static str,
    pub named: bool,
}

/// An edge between two node roles; the variant decides its orientation.
#[derive(Debug, Clone, Copy)]
pub struct EdgeRole {
    pub var: &'static str,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub nodes: &'static [NodeRole],
    pub edges: &'static [EdgeRole],
}

const fn node(var: &'static str, named: bool) -> NodeRole {
    NodeRole { var, named }
}

const fn edge(var: &'static str, a: usize, b: usize) -> EdgeRole {
    EdgeRole { var, a, b }
}

const N: NodeRole = node("n", false);
const N_NAMED: NodeRole = node("n", true);
const M0: NodeRole = node("m0", false);
const M0_NAMED: NodeRole = node("m0", true);
const M1_NAMED: NodeRole = node("m1", true);
const R0: EdgeRole = edge("r0", 0, 1);
const R1_CHAIN: EdgeRole = edge("r1", 1, 2);
const R1_FORK: EdgeRole = edge("r1", 0, 2);
const R1_PARALLEL: EdgeRole = edge("r1", 0, 1);

pub fn shape(p: PatternId) -> Shape {
    use PatternId::*;
    let (nodes, edges): (&'static [NodeRole], &'static [EdgeRole]) = match p {
        Basic1 => (&[N], &[]),
        Basic2 => (&[N_NAMED], &[]),
        Basic3 => (&[N, M0], &[R0]),
        Basic4 | TimeSensitive => (&[N, M0_NAMED], &[R0]),
        Basic5 | GroupBy => (&[N, M0, M1_NAMED], &[R0, R1_CHAIN]),
        Basic6 => (&[N, M0_NAMED, M1_NAMED], &[R0, R1_FORK]),
        Basic7 => (&[N, M0], &[R0, R1_PARALLEL]),
        Comparison => (&[N_NAMED, M0_NAMED], &[]),
        OptionalMatch => (&[N, M0, M1_NAMED], &[R0, R1_FORK]),
        Union => (&[N, M0_NAMED, M1_NAMED], &[R0, R1_FORK]),
    };
    Shape { nodes, edges }
}

/// Orientation flags for every edge: `true` points from role `a` to role `b`.
pub fn variants(p: PatternId) -> Vec<Vec<bool>> {
    let k = shape(p).edges.len();
    (0..1u32 << k)
        .map(|bits| (0..k).map(|i| bits & (1 << (k - 1 - i)) == 0).collect())
        .collect()
}

pub fn variant_key(outs: &[bool]) -> String {
    if outs.is_empty() {
        return "any".into();
    }
    let parts: Vec<&str> = outs.iter().map(|o| if *o { "out" } else { "in" }).collect();
    parts.join("_")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeSlot {
    pub var: &'static str,
    pub label: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeSlot {
    pub var: &'static str,
    pub label: String,
    /// Node slot indices of the relation's subject and object.
    pub subj: usize,
    pub obj: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CmpOp {
    Gt,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
        }
    }
}

/// An instantiated MATCH part: labels, relation types and names filled in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MatchInstance {
    pub pattern: PatternId,
    pub variant: String,
    pub nodes: Vec<NodeSlot>,
    pub edges: Vec<EdgeSlot>,
    /// Year of the time-sensitive qualifier predicate.
    pub year: Option<i64>,
    /// Property and operator of the comparison pattern.
    pub compare: Option<(String, CmpOp)>,
}

fn lit(s: &str) -> String {
    let mut out = String::new();
    let _ = write_string_literal(&mut out, s);
    out
}

impl MatchInstance {
    pub fn node_text(&self, i: usize, with_names: bool) -> String {
        let n = &self.nodes[i];
        let mut s = format!("({}:{}", n.var, ident(&n.label));
        if let (true, Some(name)) = (with_names, &n.name) {
            let _ = write!(s, " {{name: {}}}", lit(name));
        }
        s.push(')');
        s
    }

    fn edge_text(&self, j: usize, from: usize) -> String {
        let e = &self.edges[j];
        let body = format!("[{}:{}]", e.var, ident(&e.label));
        if e.subj == from {
            format!("-{body}->")
        } else {
            format!("<-{body}-")
        }
    }

    pub(crate) fn hop(&self, from: usize, j: usize, to: usize, names: bool) -> String {
        format!("{}{}", self.edge_text(j, from), self.node_text(to, names))
    }

    /// The MATCH (or CALL) part of the gold query. With `names` false, named
    /// nodes lose their name maps, which gives the discovery skeleton.
    pub fn render(&self, names: bool) -> String {
        use PatternId::*;
        let n = |i| self.node_text(i, names);
        match self.pattern {
            Basic1 | Basic2 => format!("MATCH {}", n(0)),
            Basic3 | Basic4 => format!("MATCH {}{}", n(0), self.hop(0, 0, 1, names)),
            TimeSensitive => {
                let y = self.year.unwrap_or_default();
                format!(
                    "MATCH {}{} WHERE r0.start_year <= {y} AND (r0.end_year >= {y} OR r0.end_year IS NULL)",
                    n(0),
                    self.hop(0, 0, 1, names)
                )
            }
            Basic5 | GroupBy => format!(
                "MATCH {}{}{}",
                n(0),
                self.hop(0, 0, 1, names),
                self.hop(1, 1, 2, names)
            ),
            Basic6 => format!(
                "MATCH {}{},{}{}",
                n(0),
                self.hop(0, 0, 1, names),
                n(0),
                self.hop(0, 1, 2, names)
            ),
            Basic7 => format!(
                "MATCH {}{},{}{}",
                n(0),
                self.hop(0, 0, 1, names),
                n(0),
                self.hop(0, 1, 1, names)
            ),
            Comparison => format!("MATCH {}, {}", n(0), n(1)),
            OptionalMatch => format!(
                "MATCH {}{} OPTIONAL MATCH {}{}",
                n(0),
                self.hop(0, 1, 2, names),
                n(0),
                self.hop(0, 0, 1, names)
            ),
            Union => format!(
                "CALL {{ MATCH {}{} RETURN n, m0 AS m UNION MATCH {}{} RETURN n, m1 AS m }}",
                n(0),
                self.hop(0, 0, 1, names),
                n(0),
                self.hop(0, 1, 2, names)
            ),
        }
    }

    pub fn named_nodes(&self) -> impl Iterator<Item = &NodeSlot> {
        self.nodes.iter().filter(|n| n.name.is_some())
    }

    pub fn edge_between(&self, a: usize, b: usize) -> impl Iterator<Item = &EdgeSlot> {
        self.edges
            .iter()
            .filter(move |e| (e.subj == a && e.obj == b) || (e.subj == b && e.obj == a))
    }
}

/// Every schema-conformant label assignment for every orientation variant of
/// `p`, with names left empty.
pub fn skeletons(p: PatternId, schema: &GraphSchema) -> Vec<MatchInstance> {
    let sh = shape(p);
    let mut out = Vec::new();
    for outs in variants(p) {
        let key = variant_key(&outs);
        let mut labels: Vec<Option<String>> = alloc::vec![None; sh.nodes.len()];
        let mut edges: Vec<EdgeSlot> = Vec::new();
        assign(p, sh, &outs, &key, schema, 0, &mut labels, &mut edges, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

#[allow(clippy::too_many_arguments)]
fn assign(
    p: PatternId,
    sh: Shape,
    outs: &[bool],
    key: &str,
    schema: &GraphSchema,
    j: usize,
    labels: &mut Vec<Option<String>>,
    edges: &mut Vec<EdgeSlot>,
    out: &mut Vec<MatchInstance>,
) {
    if j == sh.edges.len() {
        let node_labels: Vec<Vec<String>> = labels
            .iter()
            .map(|l| match l {
                Some(l) => alloc::vec![l.clone()],
                None => schema.entities.iter().map(|e| e.label.clone()).collect(),
            })
            .collect();
        // Edgeless shapes: one label for all nodes (comparison shares it).
        let choices = if sh.nodes.len() > 1 && sh.edges.is_empty() {
            node_labels[0].iter().map(|l| alloc::vec![l.clone(); sh.nodes.len()]).collect()
        } else {
            cartesian(&node_labels)
        };
        for ls in choices {
            out.push(MatchInstance {
                pattern: p,
                variant: key.into(),
                nodes: sh
                    .nodes
                    .iter()
                    .zip(ls)
                    .map(|(r, label)| NodeSlot {
                        var: r.var,
                        label,
                        name: None,
                    })
                    .collect(),
                edges: edges.clone(),
                year: None,
                compare: None,
            });
        }
        return;
    }
    let role = sh.edges[j];
    let (s, o) = if outs[j] { (role.a, role.b) } else { (role.b, role.a) };
    let mut seen = BTreeSet::new();
    for r in &schema.relations {
        if labels[s].as_deref().is_some_and(|l| l != r.subj_label) || labels[o].as_deref().is_some_and(|l| l != r.obj_label) {
            continue;
        }
        if s == o && r.subj_label != r.obj_label {
            continue;
        }
        if !seen.insert((&r.label, &r.subj_label, &r.obj_label)) {
            continue;
        }
        let (old_s, old_o) = (labels[s].clone(), labels[o].clone());
        labels[s] = Some(r.subj_label.clone());
        labels[o] = Some(r.obj_label.clone());
        edges.push(EdgeSlot {
            var: role.var,
            label: r.label.clone(),
            subj: s,
            obj: o,
        });
        assign(p, sh, outs, key, schema, j + 1, labels, edges, out);
        edges.pop();
        labels[s] = old_s;
        labels[o] = old_o;
    }
}

fn cartesian(sets: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut acc: Vec<Vec<String>> = alloc::vec![Vec::new()];
    for set in sets {
        let mut next = Vec::new();
        for prefix in &acc {
            for x in set {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}
