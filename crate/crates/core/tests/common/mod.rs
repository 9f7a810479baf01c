//! Independent re-derivation of task metadata from gold Cypher, used as an
//! oracle over generator output.
#![allow(dead_code)]

pub mod ex;
pub mod oracle;
pub mod psjs;

use std::collections::{BTreeMap, BTreeSet};

use cypherkit_core::cypher::ast::{BinaryOp, Clause, Expr, Literal, Projection, Query, RelDirection};
use cypherkit_core::schema::GraphSchema;
use cypherkit_core::task::{PatternId, ReturnTemplateId};
use cypherkit_core::value::Datatype;

#[derive(Debug, Clone)]
pub struct Edge {
    pub var: String,
    pub label: String,
    pub subj: String,
    pub obj: String,
}

#[derive(Debug, Clone)]
pub struct Shape {
    pub pattern: PatternId,
    pub template: ReturnTemplateId,
    /// var -> (label, name literal)
    pub nodes: BTreeMap<String, (String, Option<String>)>,
    pub edges: Vec<Edge>,
}

fn collect(q: &Query, nodes: &mut BTreeMap<String, (String, Option<String>)>, edges: &mut Vec<Edge>, optional: &mut bool) {
    for c in &q.clauses {
        match c {
            Clause::Match(m) => {
                *optional |= m.optional;
                for p in &m.patterns {
                    for n in &p.nodes {
                        let var = n.var.clone().unwrap_or_default();
                        let name = n.props.iter().find(|(k, _)| k == "name").and_then(|(_, e)| match e {
                            Expr::Literal(Literal::Text(s)) => Some(s.clone()),
                            _ => None,
                        });
                        let slot = nodes.entry(var).or_insert((n.labels.first().cloned().unwrap_or_default(), None));
                        if name.is_some() {
                            slot.1 = name;
                        }
                    }
                    for (i, r) in p.rels.iter().enumerate() {
                        let a = p.nodes[i].var.clone().unwrap_or_default();
                        let b = p.nodes[i + 1].var.clone().unwrap_or_default();
                        let (subj, obj) = match r.direction {
                            RelDirection::Left => (b, a),
                            _ => (a, b),
                        };
                        edges.push(Edge {
                            var: r.var.clone().unwrap_or_default(),
                            label: r.types.first().cloned().unwrap_or_default(),
                            subj,
                            obj,
                        });
                    }
                }
            }
            Clause::CallUnion(u) => {
                for b in &u.branches {
                    collect(b, nodes, edges, optional);
                }
            }
            _ => {}
        }
    }
}

fn mentions(e: &Expr, prop: &str) -> bool {
    match e {
        Expr::Property(_, p) => p == prop,
        Expr::Binary(_, a, b) => mentions(a, prop) || mentions(b, prop),
        Expr::Unary(_, a) => mentions(a, prop),
        Expr::IsNull { expr, .. } => mentions(expr, prop),
        _ => false,
    }
}

fn has_case(p: &Projection) -> bool {
    p.items.iter().any(|i| matches!(i.expr, Expr::Case { .. }))
}

fn is_aggregate(e: &Expr) -> bool {
    matches!(e, Expr::Function { name, .. } if ["count", "avg", "sum", "min", "max"].contains(&name.as_str()))
}

pub fn classify(q: &Query) -> Shape {
    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    let mut optional = false;
    collect(q, &mut nodes, &mut edges, &mut optional);
    let union = q.clauses.iter().any(|c| matches!(c, Clause::CallUnion(_)));
    let timed = q.clauses.iter().any(|c| matches!(c, Clause::Match(m) if m.where_.as_ref().is_some_and(|w| mentions(w, "start_year"))));
    let projections: Vec<&Projection> = q
        .clauses
        .iter()
        .filter_map(|c| match c {
            Clause::With(p) | Clause::Return(p) => Some(p),
            _ => None,
        })
        .collect();
    let grouped = projections.iter().any(|p| !p.distinct && p.items.iter().any(|i| is_aggregate(&i.expr)) && p.items.len() == 2);
    let compared = projections.iter().any(|p| has_case(p));
    let named = |v: &str| nodes.get(v).is_some_and(|n| n.1.is_some());
    let pattern = if union {
        PatternId::Union
    } else if optional {
        PatternId::OptionalMatch
    } else if compared {
        PatternId::Comparison
    } else if timed {
        PatternId::TimeSensitive
    } else if grouped {
        PatternId::GroupBy
    } else {
        match (nodes.len(), edges.len()) {
            (1, 0) if named("n") => PatternId::Basic2,
            (1, 0) => PatternId::Basic1,
            (2, 1) if named("m0") => PatternId::Basic4,
            (2, 1) => PatternId::Basic3,
            (2, 2) => PatternId::Basic7,
            (3, 2) if edges.iter().all(|e| e.subj == "n" || e.obj == "n") => PatternId::Basic6,
            (3, 2) => PatternId::Basic5,
            other => panic!("unclassifiable shape {other:?}"),
        }
    };
    let template = if pattern.is_special() {
        ReturnTemplateId::Special
    } else {
        let ret = projections.last().expect("query has a RETURN");
        let with_filter = projections.iter().any(|p| p.where_.is_some());
        let unwinds = q.clauses.iter().any(|c| matches!(c, Clause::Unwind(_)));
        if unwinds {
            ReturnTemplateId::Property
        } else if !ret.order_by.is_empty() && ret.limit.is_some() {
            ReturnTemplateId::Argmax
        } else if !ret.order_by.is_empty() {
            ReturnTemplateId::Sort
        } else if ret.items.iter().any(|i| is_aggregate(&i.expr)) {
            ReturnTemplateId::Aggregate
        } else if with_filter {
            ReturnTemplateId::Filter
        } else if matches!(&ret.items[0].expr, Expr::Property(_, p) if p != "name") {
            ReturnTemplateId::Property
        } else {
            ReturnTemplateId::Name
        }
    };
    Shape {
        pattern,
        template,
        nodes,
        edges,
    }
}

fn prop_type(schema: &GraphSchema, shape: &Shape, e: &Expr) -> Option<Datatype> {
    let Expr::Property(base, p) = e else { return None };
    let Expr::Var(v) = &**base else { return None };
    let label = &shape.nodes.get(v)?.0;
    schema.entity(label)?.properties.iter().find(|x| &x.name == p).map(|x| x.datatype)
}

fn walk<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    out.push(e);
    match e {
        Expr::Binary(_, a, b) => {
            walk(a, out);
            walk(b, out);
        }
        Expr::Unary(_, a) | Expr::Property(a, _) => walk(a, out),
        Expr::IsNull { expr, .. } => walk(expr, out),
        Expr::Function { args, .. } | Expr::List(args) => args.iter().for_each(|a| walk(a, out)),
        Expr::Case { operand, whens, else_ } => {
            if let Some(o) = operand {
                walk(o, out);
            }
            for (w, t) in whens {
                walk(w, out);
                walk(t, out);
            }
            if let Some(x) = else_ {
                walk(x, out);
            }
        }
        _ => {}
    }
}

/// Ordering comparisons or sorts on non-orderable properties, and numeric
/// aggregates on non-numeric ones.
pub fn datatype_violations(q: &Query, schema: &GraphSchema) -> Vec<String> {
    let shape = classify(q);
    let mut exprs = Vec::new();
    let mut sorts = Vec::new();
    for c in &q.clauses {
        match c {
            Clause::With(p) | Clause::Return(p) => {
                p.items.iter().for_each(|i| walk(&i.expr, &mut exprs));
                if let Some(w) = &p.where_ {
                    walk(w, &mut exprs);
                }
                sorts.extend(p.order_by.iter().map(|s| &s.expr));
            }
            Clause::Match(m) => {
                if let Some(w) = &m.where_ {
                    walk(w, &mut exprs);
                }
            }
            _ => {}
        }
    }
    let mut bad = Vec::new();
    for s in sorts {
        if let Some(d) = prop_type(schema, &shape, s) {
            if !matches!(d, Datatype::Int | Datatype::Float | Datatype::Date) {
                bad.push(format!("sort on {d:?}"));
            }
        }
    }
    for e in exprs {
        match e {
            Expr::Binary(BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge, a, b) => {
                for side in [a, b] {
                    if let Some(d) = prop_type(schema, &shape, side) {
                        if !matches!(d, Datatype::Int | Datatype::Float | Datatype::Date) {
                            bad.push(format!("ordering comparison on {d:?}"));
                        }
                    }
                }
            }
            Expr::Function { name, args, .. } if ["avg", "sum"].contains(&name.as_str()) => {
                if let Some(d) = args.first().and_then(|a| prop_type(schema, &shape, a)) {
                    if !matches!(d, Datatype::Int | Datatype::Float) {
                        bad.push(format!("{name} on {d:?}"));
                    }
                }
            }
            Expr::Function { name, args, .. } if ["min", "max"].contains(&name.as_str()) => {
                if let Some(d) = args.first().and_then(|a| prop_type(schema, &shape, a)) {
                    if !matches!(d, Datatype::Int | Datatype::Float | Datatype::Date) {
                        bad.push(format!("{name} on {d:?}"));
                    }
                }
            }
            _ => {}
        }
    }
    bad
}

fn closure(schema: &GraphSchema) -> BTreeMap<String, BTreeSet<String>> {
    let mut direct: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in &schema.relations {
        direct.entry(r.label.clone()).or_default().extend(r.characteristics.entails.iter().cloned());
    }
    let mut out = BTreeMap::new();
    for start in direct.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<String> = direct[start].iter().cloned().collect();
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(direct.get(&x).into_iter().flatten().cloned());
            }
        }
        out.insert(start.clone(), seen);
    }
    out
}

/// Which realism rule, if any, the shape falls under.
pub fn rule_violation(shape: &Shape, schema: &GraphSchema) -> Option<&'static str> {
    use cypherkit_core::schema::{Cardinality, Participation};
    let chars = |l: &str| schema.relations.iter().find(|r| r.label == l).map(|r| r.characteristics.clone()).unwrap_or_default();
    let edge = |var: &str| shape.edges.iter().find(|e| e.var == var);
    let one_per_subj = |c: Cardinality| matches!(c, Cardinality::OneOne | Cardinality::ManyOne);
    let one_per_obj = |c: Cardinality| matches!(c, Cardinality::OneOne | Cardinality::OneMany);
    match shape.pattern {
        PatternId::GroupBy | PatternId::OptionalMatch => {
            let e = edge("r0")?;
            let c = chars(&e.label).cardinality;
            if (e.subj == "n" && one_per_subj(c)) || (e.obj == "n" && one_per_obj(c)) {
                return Some("R1");
            }
        }
        _ => {}
    }
    if matches!(shape.pattern, PatternId::Basic5 | PatternId::GroupBy) {
        let (a, b) = (edge("r0")?, edge("r1")?);
        let c = chars(&a.label).cardinality;
        if a.label == b.label
            && ((a.obj == "m0" && b.obj == "m0" && one_per_obj(c)) || (a.subj == "m0" && b.subj == "m0" && one_per_subj(c)))
        {
            return Some("R2");
        }
    }
    if shape.pattern == PatternId::Basic3 {
        let e = edge("r0")?;
        let c = chars(&e.label);
        let p = if e.subj == "n" { c.subj_participation } else { c.obj_participation };
        if p == Participation::Total {
            return Some("R3");
        }
    }
    let same_target = match shape.pattern {
        PatternId::Basic7 => true,
        PatternId::Basic6 | PatternId::Union => shape.nodes.get("m0") == shape.nodes.get("m1"),
        _ => false,
    };
    if same_target {
        let (a, b) = (edge("r0")?, edge("r1")?);
        let ent = closure(schema);
        let implies = |x: &str, y: &str| ent.get(x).is_some_and(|s| s.contains(y));
        let same_side = (a.subj == "n") == (b.subj == "n");
        if same_side && (a.label == b.label || implies(&a.label, &b.label) || implies(&b.label, &a.label)) {
            return Some("R4");
        }
    }
    None
}
