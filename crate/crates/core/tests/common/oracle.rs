//! Brute-force reference interpreter for the query shapes the generator
//! emits. MATCH clauses enumerate every assignment of relations to edge
//! variables and entities to the remaining node variables.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use cypherkit_core::cypher::ast::{BinaryOp, Clause, Expr, Literal, MatchClause, Projection, Query, RelDirection, UnaryOp};
use cypherkit_core::cypher::Cell;
use cypherkit_core::graph::{EntityId, PropertyGraph, RelationId};
use cypherkit_core::metrics::cells_equal;
use cypherkit_core::value::{Date, PropertyValue};

#[derive(Debug, Clone, PartialEq)]
pub enum V {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Date(Date),
    List(Vec<V>),
    Node(EntityId),
    Rel(RelationId),
}

type Row = BTreeMap<String, V>;

fn from_prop(p: &PropertyValue) -> V {
    match p {
        PropertyValue::Text(s) => V::Text(s.clone()),
        PropertyValue::Int(i) => V::Int(*i),
        PropertyValue::Float(x) => V::Float(*x),
        PropertyValue::Date(d) => V::Date(*d),
        PropertyValue::ListText(l) => V::List(l.iter().cloned().map(V::Text).collect()),
    }
}

fn num(v: &V) -> Option<f64> {
    match v {
        V::Int(i) => Some(*i as f64),
        V::Float(x) => Some(*x),
        _ => None,
    }
}

fn cmp(a: &V, b: &V) -> Option<Ordering> {
    match (a, b) {
        (V::Text(x), V::Text(y)) => Some(x.cmp(y)),
        (V::Date(x), V::Date(y)) => Some(x.cmp(y)),
        (V::Bool(x), V::Bool(y)) => Some(x.cmp(y)),
        _ => num(a)?.partial_cmp(&num(b)?),
    }
}

fn eq(a: &V, b: &V) -> Option<bool> {
    match (a, b) {
        (V::Null, _) | (_, V::Null) => None,
        (V::Node(x), V::Node(y)) => Some(x == y),
        (V::Rel(x), V::Rel(y)) => Some(x == y),
        (V::List(x), V::List(y)) => Some(x.len() == y.len() && x.iter().zip(y).all(|(p, q)| eq(p, q) == Some(true))),
        _ => Some(cmp(a, b) == Some(Ordering::Equal)),
    }
}

/// Sort order: nulls after all values.
fn sort_cmp(a: &V, b: &V) -> Ordering {
    match (a, b) {
        (V::Null, V::Null) => Ordering::Equal,
        (V::Null, _) => Ordering::Greater,
        (_, V::Null) => Ordering::Less,
        (V::Node(x), V::Node(y)) => x.cmp(y),
        _ => cmp(a, b).unwrap_or(Ordering::Equal),
    }
}

fn truth(v: &V) -> Option<bool> {
    match v {
        V::Bool(b) => Some(*b),
        V::Null => None,
        other => panic!("not a boolean: {other:?}"),
    }
}

fn tv(b: Option<bool>) -> V {
    b.map(V::Bool).unwrap_or(V::Null)
}

struct Ctx<'g> {
    g: &'g PropertyGraph,
}

impl Ctx<'_> {
    fn eval(&self, e: &Expr, row: &Row) -> V {
        match e {
            Expr::Literal(l) => match l {
                Literal::Null => V::Null,
                Literal::Bool(b) => V::Bool(*b),
                Literal::Int(i) => V::Int(*i),
                Literal::Float(x) => V::Float(*x),
                Literal::Text(s) => V::Text(s.clone()),
            },
            Expr::Var(v) => row.get(v).cloned().unwrap_or_else(|| panic!("unbound {v}")),
            Expr::Property(base, key) => match self.eval(base, row) {
                V::Node(id) => self.g.entity(id).properties.get(key).map(from_prop).unwrap_or(V::Null),
                V::Rel(id) => self.g.relation(id).properties.get(key).map(from_prop).unwrap_or(V::Null),
                V::Null => V::Null,
                other => panic!("property of {other:?}"),
            },
            Expr::List(items) => V::List(items.iter().map(|i| self.eval(i, row)).collect()),
            Expr::Unary(UnaryOp::Not, a) => tv(truth(&self.eval(a, row)).map(|b| !b)),
            Expr::IsNull { expr, negated } => V::Bool((self.eval(expr, row) == V::Null) != *negated),
            Expr::Binary(op, a, b) => {
                let (x, y) = (self.eval(a, row), self.eval(b, row));
                match op {
                    BinaryOp::And => tv(match (truth(&x), truth(&y)) {
                        (Some(false), _) | (_, Some(false)) => Some(false),
                        (Some(true), Some(true)) => Some(true),
                        _ => None,
                    }),
                    BinaryOp::Or => tv(match (truth(&x), truth(&y)) {
                        (Some(true), _) | (_, Some(true)) => Some(true),
                        (Some(false), Some(false)) => Some(false),
                        _ => None,
                    }),
                    BinaryOp::Eq => tv(eq(&x, &y)),
                    BinaryOp::Ne => tv(eq(&x, &y).map(|b| !b)),
                    BinaryOp::Lt => tv(cmp(&x, &y).map(|o| o == Ordering::Less)),
                    BinaryOp::Le => tv(cmp(&x, &y).map(|o| o != Ordering::Greater)),
                    BinaryOp::Gt => tv(cmp(&x, &y).map(|o| o == Ordering::Greater)),
                    BinaryOp::Ge => tv(cmp(&x, &y).map(|o| o != Ordering::Less)),
                    BinaryOp::In => match y {
                        V::Null => V::Null,
                        V::List(items) => {
                            let mut unknown = false;
                            for i in &items {
                                match eq(&x, i) {
                                    Some(true) => return V::Bool(true),
                                    None => unknown = true,
                                    Some(false) => {}
                                }
                            }
                            if unknown {
                                V::Null
                            } else {
                                V::Bool(false)
                            }
                        }
                        other => panic!("IN over {other:?}"),
                    },
                    other => panic!("operator {other:?} outside the oracle"),
                }
            }
            Expr::Case { operand: None, whens, else_ } => {
                for (w, t) in whens {
                    if truth(&self.eval(w, row)) == Some(true) {
                        return self.eval(t, row);
                    }
                }
                else_.as_ref().map(|x| self.eval(x, row)).unwrap_or(V::Null)
            }
            Expr::Function { name, args, .. } if name.eq_ignore_ascii_case("date") => match self.eval(&args[0], row) {
                V::Text(s) => V::Date(Date::parse_iso(&s).expect("iso date")),
                V::Null => V::Null,
                other => panic!("date({other:?})"),
            },
            other => panic!("expression outside the oracle: {other:?}"),
        }
    }

    fn matches(&self, m: &MatchClause, row: &Row) -> Vec<Row> {
        // Flatten every pattern into node and edge slots with stable names.
        let mut node_slots: Vec<(String, &cypherkit_core::cypher::ast::NodePattern)> = Vec::new();
        let mut edges: Vec<(String, &cypherkit_core::cypher::ast::RelPattern, String, String)> = Vec::new();
        let mut anon = 0;
        let mut name_of = |v: &Option<String>| {
            v.clone().unwrap_or_else(|| {
                anon += 1;
                format!(" anon{anon}")
            })
        };
        for p in &m.patterns {
            let names: Vec<String> = p.nodes.iter().map(|n| name_of(&n.var)).collect();
            for (n, name) in p.nodes.iter().zip(&names) {
                node_slots.push((name.clone(), n));
            }
            for (i, r) in p.rels.iter().enumerate() {
                edges.push((name_of(&r.var), r, names[i].clone(), names[i + 1].clone()));
            }
        }
        let mut out = Vec::new();
        self.assign_edges(0, &edges, &node_slots, row.clone(), &mut Vec::new(), &mut out);
        out.retain(|r| m.where_.as_ref().is_none_or(|w| truth(&self.eval(w, r)) == Some(true)));
        out
    }

    fn node_ok(&self, id: EntityId, n: &cypherkit_core::cypher::ast::NodePattern, row: &Row) -> bool {
        let e = self.g.entity(id);
        n.labels.iter().all(|l| &e.label == l)
            && n.props.iter().all(|(k, v)| {
                let want = self.eval(v, row);
                eq(&e.properties.get(k).map(from_prop).unwrap_or(V::Null), &want) == Some(true)
            })
    }

    fn bind_node(&self, row: &mut Row, var: &str, id: EntityId) -> bool {
        match row.get(var) {
            Some(V::Node(x)) => *x == id,
            Some(V::Null) => false,
            Some(other) => panic!("{var} bound to {other:?}"),
            None => {
                row.insert(var.into(), V::Node(id));
                true
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn assign_edges(
        &self,
        j: usize,
        edges: &[(String, &cypherkit_core::cypher::ast::RelPattern, String, String)],
        nodes: &[(String, &cypherkit_core::cypher::ast::NodePattern)],
        row: Row,
        used: &mut Vec<RelationId>,
        out: &mut Vec<Row>,
    ) {
        if j == edges.len() {
            self.assign_nodes(0, nodes, row, out);
            return;
        }
        let (var, r, a, b) = &edges[j];
        for rid in self.g.relation_ids() {
            if used.contains(&rid) {
                continue;
            }
            let rel = self.g.relation(rid);
            if !r.types.is_empty() && !r.types.contains(&rel.label) {
                continue;
            }
            let (s, o) = self.g.endpoints(rid);
            let orientations: Vec<(EntityId, EntityId)> = match r.direction {
                RelDirection::Right => vec![(s, o)],
                RelDirection::Left => vec![(o, s)],
                RelDirection::Both => vec![(s, o), (o, s)],
            };
            for (x, y) in orientations {
                let mut next = row.clone();
                match next.get(var.as_str()) {
                    Some(V::Rel(bound)) if *bound != rid => continue,
                    Some(V::Rel(_)) => {}
                    Some(other) => panic!("{var} bound to {other:?}"),
                    None => {
                        next.insert(var.clone(), V::Rel(rid));
                    }
                }
                if !self.bind_node(&mut next, a, x) || !self.bind_node(&mut next, b, y) {
                    continue;
                }
                used.push(rid);
                self.assign_edges(j + 1, edges, nodes, next, used, out);
                used.pop();
            }
        }
    }

    fn assign_nodes(&self, i: usize, nodes: &[(String, &cypherkit_core::cypher::ast::NodePattern)], row: Row, out: &mut Vec<Row>) {
        if i == nodes.len() {
            out.push(row);
            return;
        }
        let (var, n) = &nodes[i];
        match row.get(var.as_str()) {
            Some(V::Node(id)) => {
                if self.node_ok(*id, n, &row) {
                    self.assign_nodes(i + 1, nodes, row, out);
                }
            }
            Some(_) => {}
            None => {
                for id in self.g.entity_ids() {
                    if self.node_ok(id, n, &row) {
                        let mut next = row.clone();
                        next.insert(var.clone(), V::Node(id));
                        self.assign_nodes(i + 1, nodes, next, out);
                    }
                }
            }
        }
    }

    fn aggregate(&self, e: &Expr, group: &[Row]) -> V {
        let (name, distinct, arg) = match e {
            Expr::CountStar => return V::Int(group.len() as i64),
            Expr::Function { name, distinct, args } => (name.to_ascii_lowercase(), *distinct, &args[0]),
            other => panic!("not an aggregate: {other:?}"),
        };
        let mut vals: Vec<V> = group.iter().map(|r| self.eval(arg, r)).filter(|v| *v != V::Null).collect();
        if distinct {
            let mut uniq: Vec<V> = Vec::new();
            for v in vals {
                if !uniq.iter().any(|u| eq(u, &v) == Some(true)) {
                    uniq.push(v);
                }
            }
            vals = uniq;
        }
        match name.as_str() {
            "count" => V::Int(vals.len() as i64),
            "min" => vals.into_iter().min_by(sort_cmp).unwrap_or(V::Null),
            "max" => vals.into_iter().max_by(sort_cmp).unwrap_or(V::Null),
            "avg" if vals.is_empty() => V::Null,
            "avg" => V::Float(vals.iter().filter_map(num).sum::<f64>() / vals.len() as f64),
            "sum" if vals.iter().all(|v| matches!(v, V::Int(_))) => {
                V::Int(vals.iter().map(|v| if let V::Int(i) = v { *i } else { 0 }).sum())
            }
            "sum" => V::Float(vals.iter().filter_map(num).sum()),
            other => panic!("aggregate {other} outside the oracle"),
        }
    }

    /// Applies a WITH or RETURN. Returns the new rows and their column names.
    fn project(&self, p: &Projection, rows: Vec<Row>) -> (Vec<Row>, Vec<String>) {
        assert!(!p.star, "RETURN * is outside the oracle");
        let is_agg = |e: &Expr| matches!(e, Expr::CountStar) || matches!(e, Expr::Function { name, .. } if ["count", "sum", "avg", "min", "max"].contains(&name.to_ascii_lowercase().as_str()));
        let cols: Vec<String> = p.items.iter().map(|i| i.column_name()).collect();
        // Each output row keeps the scope it came from for ORDER BY.
        let mut out: Vec<(Row, Row)> = Vec::new();
        if p.items.iter().any(|i| is_agg(&i.expr)) {
            let keys: Vec<usize> = (0..p.items.len()).filter(|&k| !is_agg(&p.items[k].expr)).collect();
            let mut groups: Vec<(Vec<V>, Vec<Row>)> = Vec::new();
            for r in rows {
                let key: Vec<V> = keys.iter().map(|&k| self.eval(&p.items[k].expr, &r)).collect();
                match groups.iter_mut().find(|(k, _)| k.iter().zip(&key).all(|(a, b)| a == b)) {
                    Some((_, members)) => members.push(r),
                    None => groups.push((key, vec![r])),
                }
            }
            if groups.is_empty() && keys.is_empty() {
                groups.push((vec![], vec![]));
            }
            for (key, members) in groups {
                let mut new = Row::new();
                let mut ki = key.into_iter();
                for (item, col) in p.items.iter().zip(&cols) {
                    let v = if is_agg(&item.expr) { self.aggregate(&item.expr, &members) } else { ki.next().unwrap() };
                    new.insert(col.clone(), v);
                }
                out.push((new.clone(), new));
            }
        } else {
            for r in rows {
                let mut new = Row::new();
                for (item, col) in p.items.iter().zip(&cols) {
                    new.insert(col.clone(), self.eval(&item.expr, &r));
                }
                let mut scope = r.clone();
                scope.extend(new.clone());
                out.push((new, scope));
            }
        }
        if p.distinct {
            let mut kept: Vec<(Row, Row)> = Vec::new();
            for (r, s) in out {
                if !kept.iter().any(|(k, _)| k == &r) {
                    kept.push((r, s));
                }
            }
            out = kept;
        }
        if !p.order_by.is_empty() {
            out.sort_by(|(_, a), (_, b)| {
                for s in &p.order_by {
                    let (x, y) = (self.eval(&s.expr, a), self.eval(&s.expr, b));
                    let o = if s.ascending { sort_cmp(&x, &y) } else { sort_cmp(&y, &x) };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
        }
        let mut rows: Vec<Row> = out.into_iter().map(|(r, _)| r).collect();
        if let Some(w) = &p.where_ {
            rows.retain(|r| truth(&self.eval(w, r)) == Some(true));
        }
        if let Some(l) = &p.limit {
            let V::Int(n) = self.eval(l, &Row::new()) else { panic!("limit") };
            rows.truncate(n as usize);
        }
        (rows, cols)
    }

    fn run(&self, q: &Query, input: Vec<Row>) -> (Vec<Row>, Vec<String>) {
        let mut rows = input;
        for c in &q.clauses {
            match c {
                Clause::Match(m) => {
                    let mut next = Vec::new();
                    for r in rows {
                        let found = self.matches(m, &r);
                        if found.is_empty() && m.optional {
                            let mut padded = r.clone();
                            for p in &m.patterns {
                                for n in &p.nodes {
                                    if let Some(v) = &n.var {
                                        padded.entry(v.clone()).or_insert(V::Null);
                                    }
                                }
                                for rel in &p.rels {
                                    if let Some(v) = &rel.var {
                                        padded.entry(v.clone()).or_insert(V::Null);
                                    }
                                }
                            }
                            next.push(padded);
                        }
                        next.extend(found);
                    }
                    rows = next;
                }
                Clause::With(p) => rows = self.project(p, rows).0,
                Clause::Unwind(u) => {
                    let mut next = Vec::new();
                    for r in rows {
                        let items = match self.eval(&u.expr, &r) {
                            V::Null => vec![],
                            V::List(l) => l,
                            other => vec![other],
                        };
                        for i in items {
                            let mut n = r.clone();
                            n.insert(u.alias.clone(), i);
                            next.push(n);
                        }
                    }
                    rows = next;
                }
                Clause::CallUnion(u) => {
                    let mut next = Vec::new();
                    for r in rows {
                        let mut branch_rows: Vec<Row> = Vec::new();
                        for b in &u.branches {
                            for br in self.run(b, vec![r.clone()]).0 {
                                if u.all || !branch_rows.contains(&br) {
                                    branch_rows.push(br);
                                }
                            }
                        }
                        for br in branch_rows {
                            let mut n = r.clone();
                            n.extend(br);
                            next.push(n);
                        }
                    }
                    rows = next;
                }
                Clause::Return(p) => return self.project(p, rows),
            }
        }
        (rows, vec![])
    }
}

fn to_cell(v: &V) -> Cell {
    match v {
        V::Null => Cell::Null,
        V::Bool(b) => Cell::Bool(*b),
        V::Int(i) => Cell::Int(*i),
        V::Float(x) => Cell::Float(*x),
        V::Text(s) => Cell::Text(s.clone()),
        V::Date(d) => Cell::Date(*d),
        V::List(l) => Cell::List(l.iter().map(to_cell).collect()),
        V::Node(_) | V::Rel(_) => panic!("oracle only renders literal results"),
    }
}

/// Result rows of `q` on `g`, in the query's column order.
pub fn evaluate(q: &Query, g: &PropertyGraph) -> (Vec<String>, Vec<Vec<Cell>>) {
    let ctx = Ctx { g };
    let (rows, cols) = ctx.run(q, vec![Row::new()]);
    let cells = rows.iter().map(|r| cols.iter().map(|c| to_cell(&r[c])).collect()).collect();
    (cols, cells)
}

/// Multiset equality of rows with numeric tolerance.
pub fn same_rows(a: &[Vec<Cell>], b: &[Vec<Cell>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut left: Vec<&Vec<Cell>> = b.iter().collect();
    for row in a {
        match left.iter().position(|r| r.len() == row.len() && r.iter().zip(row).all(|(x, y)| cells_equal(x, y))) {
            Some(i) => {
                left.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}
