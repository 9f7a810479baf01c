//! Clause-by-clause interpreter over an immutable [`PropertyGraph`].
//!
//! Rows are plain vectors indexed by slot; the parallel `names` vector maps
//! variables to slots. Anonymous pattern elements get hidden slots whose names
//! start with a space, so they never collide with user variables and are
//! skipped by `RETURN *`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::ast::*;
use super::runtime::{compare, equals, order_cmp, row_key, Ordered, Value};
use super::table::ResultTable;
use crate::budget::Budget;
use crate::graph::{Direction, EntityId, PropertyGraph, RelationId};
use crate::value::Date;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecError {
    Timeout,
    /// The final table exceeded `Budget::max_rows`.
    RowLimit { limit: usize },
    /// An intermediate clause exceeded `Budget::max_intermediate_rows`.
    IntermediateLimit { limit: usize },
    /// Operation applied to a value of the wrong type, e.g. `avg` over text.
    Type(String),
    /// Structurally invalid query that slipped past parsing.
    Invalid(String),
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::Timeout => f.write_str("timeout exceeded"),
            ExecError::RowLimit { limit } => write!(f, "result exceeds {limit} rows"),
            ExecError::IntermediateLimit { limit } => {
                write!(f, "intermediate result exceeds {limit} rows")
            }
            ExecError::Type(m) => write!(f, "type error: {m}"),
            ExecError::Invalid(m) => write!(f, "invalid query: {m}"),
        }
    }
}

impl core::error::Error for ExecError {}

pub type Row = Vec<Value>;

const TICK_INTERVAL: u32 = 1024;

fn type_err<T>(msg: String) -> Result<T, ExecError> {
    Err(ExecError::Type(msg))
}

/// Runs `q` and converts the final rows to cells.
pub fn execute(q: &Query, g: &PropertyGraph, budget: &Budget) -> Result<ResultTable, ExecError> {
    let ex = Executor::new(g, *budget);
    let (columns, rows) = ex.run(&q.clauses, Vec::new(), vec![Vec::new()])?;
    if let Some(limit) = budget.max_rows {
        if rows.len() > limit {
            return Err(ExecError::RowLimit { limit });
        }
    }
    Ok(ResultTable {
        columns,
        rows: rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_cell(g)).collect())
            .collect(),
    })
}

/// Runs every clause except a trailing RETURN and hands back the raw binding
/// rows, hidden slots included.
pub fn execute_bindings(
    q: &Query,
    g: &PropertyGraph,
    budget: &Budget,
) -> Result<(Vec<String>, Vec<Row>), ExecError> {
    let clauses = match q.clauses.last() {
        Some(Clause::Return(_)) => &q.clauses[..q.clauses.len() - 1],
        _ => &q.clauses[..],
    };
    Executor::new(g, *budget).run(clauses, Vec::new(), vec![Vec::new()])
}

pub fn is_hidden(name: &str) -> bool {
    name.starts_with(' ')
}

struct Executor<'g, 'b> {
    g: &'g PropertyGraph,
    budget: Budget<'b>,
    ticks: core::cell::Cell<u32>,
}

struct Env<'a> {
    names: &'a [String],
    row: &'a [Value],
    aggs: &'a [(&'a Expr, Value)],
}

fn lookup(names: &[String], v: &str) -> Option<usize> {
    names.iter().rposition(|n| n == v)
}

struct NodeOcc<'q> {
    slot: usize,
    pat: &'q NodePattern,
}

struct RelOcc<'q> {
    slot: usize,
    pat: &'q RelPattern,
    left: usize,
    right: usize,
    /// `None` accepts every type.
    type_ids: Option<Vec<u32>>,
}

enum Step {
    Scan(usize),
    Check(usize),
    Expand {
        rel: usize,
        from: usize,
        to: usize,
        from_left: bool,
        to_bound: bool,
        rel_bound: bool,
    },
}

struct Plan<'q> {
    nodes: Vec<NodeOcc<'q>>,
    rels: Vec<RelOcc<'q>>,
    steps: Vec<Step>,
    where_: Option<&'q Expr>,
}

fn scan_score(p: &NodePattern) -> u8 {
    let named = p.props.iter().any(|(k, _)| k == crate::schema::NAME_PROPERTY);
    let labelled = !p.labels.is_empty();
    match (named, labelled) {
        (true, true) => 3,
        (true, false) => 2,
        (false, true) => 1,
        (false, false) => 0,
    }
}

#[derive(Default)]
struct Acc {
    values: Vec<Value>,
    seen: Option<BTreeSet<Ordered>>,
    rows: i64,
}

impl Acc {
    fn new(distinct: bool) -> Self {
        Acc {
            values: Vec::new(),
            seen: distinct.then(BTreeSet::new),
            rows: 0,
        }
    }

    fn push(&mut self, v: Value) {
        if v.is_null() {
            return;
        }
        if let Some(seen) = &mut self.seen {
            if !seen.insert(Ordered(v.clone())) {
                return;
            }
        }
        self.values.push(v);
    }

    fn finish(self, e: &Expr) -> Result<Value, ExecError> {
        let name = match e {
            Expr::CountStar => return Ok(Value::Int(self.rows)),
            Expr::Function { name, .. } => name.to_ascii_lowercase(),
            _ => return Err(ExecError::Invalid("not an aggregate".into())),
        };
        let values = self.values;
        match name.as_str() {
            "count" => Ok(Value::Int(values.len() as i64)),
            "collect" => Ok(Value::List(values)),
            "min" => Ok(values.into_iter().min_by(order_cmp).unwrap_or(Value::Null)),
            "max" => Ok(values.into_iter().max_by(order_cmp).unwrap_or(Value::Null)),
            "sum" | "avg" => {
                let mut int_sum: Option<i64> = Some(0);
                let mut float_sum = 0.0f64;
                let mut any_float = false;
                for v in &values {
                    match v {
                        Value::Int(i) => {
                            int_sum = int_sum.and_then(|s| s.checked_add(*i));
                            float_sum += *i as f64;
                        }
                        Value::Float(x) => {
                            any_float = true;
                            float_sum += x;
                        }
                        other => return type_err(format!("{name}() requires numbers, got {}", other.type_name())),
                    }
                }
                if name == "avg" {
                    if values.is_empty() {
                        return Ok(Value::Null);
                    }
                    return Ok(Value::Float(float_sum / values.len() as f64));
                }
                if any_float {
                    Ok(Value::Float(float_sum))
                } else {
                    int_sum
                        .map(Value::Int)
                        .ok_or_else(|| ExecError::Type("integer overflow in sum()".into()))
                }
            }
            _ => Err(ExecError::Invalid(format!("unknown aggregate `{name}`"))),
        }
    }
}

impl<'g, 'b> Executor<'g, 'b> {
    fn new(g: &'g PropertyGraph, budget: Budget<'b>) -> Self {
        Executor {
            g,
            budget,
            ticks: core::cell::Cell::new(0),
        }
    }

    fn tick(&self) -> Result<(), ExecError> {
        let t = self.ticks.get().wrapping_add(1);
        self.ticks.set(t);
        if t.is_multiple_of(TICK_INTERVAL) && self.budget.deadline.expired() {
            return Err(ExecError::Timeout);
        }
        Ok(())
    }

    fn check_rows(&self, n: usize) -> Result<(), ExecError> {
        match self.budget.max_intermediate_rows {
            Some(limit) if n > limit => Err(ExecError::IntermediateLimit { limit }),
            _ => Ok(()),
        }
    }

    fn run(
        &self,
        clauses: &[Clause],
        mut names: Vec<String>,
        mut rows: Vec<Row>,
    ) -> Result<(Vec<String>, Vec<Row>), ExecError> {
        for clause in clauses {
            if self.budget.deadline.expired() {
                return Err(ExecError::Timeout);
            }
            match clause {
                Clause::Match(m) => rows = self.match_clause(m, &mut names, rows)?,
                Clause::Unwind(u) => rows = self.unwind(u, &mut names, rows)?,
                Clause::With(p) => {
                    let (cols, out) = self.project(p, &names, rows)?;
                    names = cols;
                    rows = out;
                }
                Clause::Return(p) => return self.project(p, &names, rows),
                Clause::CallUnion(c) => rows = self.call_union(c, &mut names, rows)?,
            }
        }
        Ok((names, rows))
    }

    // ---- MATCH ----

    fn plan<'q>(&self, m: &'q MatchClause, names: &mut Vec<String>) -> Plan<'q> {
        let before = names.len();
        let slot_of = |var: &Option<String>, names: &mut Vec<String>| match var {
            Some(v) => lookup(names, v).unwrap_or_else(|| {
                names.push(v.clone());
                names.len() - 1
            }),
            None => {
                names.push(format!(" anon{}", names.len()));
                names.len() - 1
            }
        };
        let mut nodes = Vec::new();
        let mut rels = Vec::new();
        for p in &m.patterns {
            let base = nodes.len();
            for n in &p.nodes {
                let slot = slot_of(&n.var, names);
                nodes.push(NodeOcc { slot, pat: n });
            }
            for (i, r) in p.rels.iter().enumerate() {
                let slot = slot_of(&r.var, names);
                let type_ids = if r.types.is_empty() {
                    None
                } else {
                    let mut ids: Vec<u32> = r
                        .types
                        .iter()
                        .filter_map(|t| self.g.relation_label_id(t))
                        .collect();
                    ids.sort_unstable();
                    ids.dedup();
                    Some(ids)
                };
                rels.push(RelOcc {
                    slot,
                    pat: r,
                    left: base + i,
                    right: base + i + 1,
                    type_ids,
                });
            }
        }

        let mut bound = vec![false; names.len()];
        bound[..before].iter_mut().for_each(|b| *b = true);
        let mut node_done = vec![false; nodes.len()];
        let mut rel_done = vec![false; rels.len()];
        let mut steps = Vec::new();
        loop {
            for (i, n) in nodes.iter().enumerate() {
                if !node_done[i] && bound[n.slot] {
                    steps.push(Step::Check(i));
                    node_done[i] = true;
                }
            }
            let next_rel = (0..rels.len())
                .find(|&i| !rel_done[i] && (node_done[rels[i].left] || node_done[rels[i].right]));
            if let Some(i) = next_rel {
                let r = &rels[i];
                let from_left = node_done[r.left];
                let (from, to) = if from_left { (r.left, r.right) } else { (r.right, r.left) };
                steps.push(Step::Expand {
                    rel: i,
                    from,
                    to,
                    from_left,
                    to_bound: bound[nodes[to].slot],
                    rel_bound: bound[r.slot],
                });
                rel_done[i] = true;
                bound[r.slot] = true;
                bound[nodes[to].slot] = true;
                node_done[to] = true;
                continue;
            }
            let best = (0..nodes.len())
                .filter(|&i| !node_done[i])
                .max_by_key(|&i| (scan_score(nodes[i].pat), core::cmp::Reverse(i)));
            match best {
                Some(i) => {
                    steps.push(Step::Scan(i));
                    node_done[i] = true;
                    bound[nodes[i].slot] = true;
                }
                None => break,
            }
        }
        Plan {
            nodes,
            rels,
            steps,
            where_: m.where_.as_ref(),
        }
    }

    fn match_clause(&self, m: &MatchClause, names: &mut Vec<String>, rows: Vec<Row>) -> Result<Vec<Row>, ExecError> {
        let before = names.len();
        let plan = self.plan(m, names);
        let width = names.len();
        let mut out: Vec<Row> = Vec::new();
        let mut used = Vec::new();
        for mut row in rows {
            row.resize(width, Value::Null);
            let start = out.len();
            self.solve(&plan, 0, &mut row, names, &mut used, &mut out)?;
            if m.optional && out.len() == start {
                row[before..].iter_mut().for_each(|v| *v = Value::Null);
                out.push(row);
            }
            self.check_rows(out.len())?;
        }
        Ok(out)
    }

    fn node_ok(&self, occ: &NodeOcc, id: EntityId, row: &[Value], names: &[String]) -> Result<bool, ExecError> {
        let e = self.g.entity(id);
        if occ.pat.labels.iter().any(|l| *l != e.label) {
            return Ok(false);
        }
        for (k, expr) in &occ.pat.props {
            let want = self.eval(expr, &Env { names, row, aggs: &[] })?;
            let have = e.properties.get(k).map(Value::from).unwrap_or(Value::Null);
            if equals(&have, &want) != Some(true) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn rel_ok(&self, occ: &RelOcc, id: RelationId, row: &[Value], names: &[String]) -> Result<bool, ExecError> {
        let r = self.g.relation(id);
        if let Some(ids) = &occ.type_ids {
            if !ids.contains(&self.g.relation_label_of(id)) {
                return Ok(false);
            }
        }
        for (k, expr) in &occ.pat.props {
            let want = self.eval(expr, &Env { names, row, aggs: &[] })?;
            let have = r.properties.get(k).map(Value::from).unwrap_or(Value::Null);
            if equals(&have, &want) != Some(true) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn scan_candidates(&self, occ: &NodeOcc, row: &[Value], names: &[String]) -> Result<Vec<EntityId>, ExecError> {
        let label = occ.pat.labels.first().map(String::as_str);
        if let Some((_, expr)) = occ.pat.props.iter().find(|(k, _)| k == crate::schema::NAME_PROPERTY) {
            return Ok(match self.eval(expr, &Env { names, row, aggs: &[] })? {
                Value::Text(name) => self.g.entities_named(label, &name).to_vec(),
                _ => Vec::new(),
            });
        }
        Ok(match label {
            Some(l) => self.g.entities_with_label(l).to_vec(),
            None => self.g.entity_ids().collect(),
        })
    }

    fn solve(
        &self,
        plan: &Plan,
        i: usize,
        row: &mut Row,
        names: &[String],
        used: &mut Vec<RelationId>,
        out: &mut Vec<Row>,
    ) -> Result<(), ExecError> {
        self.tick()?;
        let Some(step) = plan.steps.get(i) else {
            let keep = match plan.where_ {
                None => true,
                Some(w) => truth(&self.eval(w, &Env { names, row, aggs: &[] })?)? == Some(true),
            };
            if keep {
                out.push(row.clone());
                self.check_rows(out.len())?;
            }
            return Ok(());
        };
        match *step {
            Step::Check(o) => {
                let occ = &plan.nodes[o];
                if let Value::Node(id) = row[occ.slot] {
                    if self.node_ok(occ, id, row, names)? {
                        self.solve(plan, i + 1, row, names, used, out)?;
                    }
                }
            }
            Step::Scan(o) => {
                let occ = &plan.nodes[o];
                for id in self.scan_candidates(occ, row, names)? {
                    self.tick()?;
                    row[occ.slot] = Value::Node(id);
                    if self.node_ok(occ, id, row, names)? {
                        self.solve(plan, i + 1, row, names, used, out)?;
                    }
                }
                row[occ.slot] = Value::Null;
            }
            Step::Expand {
                rel,
                from,
                to,
                from_left,
                to_bound,
                rel_bound,
            } => {
                let Value::Node(from_id) = row[plan.nodes[from].slot] else {
                    return Ok(());
                };
                let r = &plan.rels[rel];
                let dirs: &[Direction] = match (r.pat.direction, from_left) {
                    (RelDirection::Right, true) | (RelDirection::Left, false) => &[Direction::Outgoing],
                    (RelDirection::Right, false) | (RelDirection::Left, true) => &[Direction::Incoming],
                    (RelDirection::Both, _) => &[Direction::Outgoing, Direction::Incoming],
                };
                let both = r.pat.direction == RelDirection::Both;
                let mut candidates: Vec<(RelationId, EntityId)> = Vec::new();
                for &dir in dirs {
                    let mut push = |rid: RelationId| {
                        let (s, o) = self.g.endpoints(rid);
                        let (here, other) = match dir {
                            Direction::Outgoing => (s, o),
                            Direction::Incoming => (o, s),
                        };
                        // An undirected self-loop is found once, not twice.
                        if here == from_id && !(both && dir == Direction::Incoming && s == o) {
                            candidates.push((rid, other));
                        }
                    };
                    if rel_bound {
                        if let Value::Rel(rid) = row[r.slot] {
                            push(rid);
                        }
                    } else {
                        match &r.type_ids {
                            None => self.g.incident(from_id, dir, None).iter().for_each(|(_, rid)| push(*rid)),
                            Some(ids) => {
                                for l in ids {
                                    self.g.incident(from_id, dir, Some(*l)).iter().for_each(|(_, rid)| push(*rid));
                                }
                            }
                        }
                    }
                }
                let to_occ = &plan.nodes[to];
                for (rid, other) in candidates {
                    self.tick()?;
                    if used.contains(&rid) || !self.rel_ok(r, rid, row, names)? {
                        continue;
                    }
                    if to_bound {
                        if row[to_occ.slot] != Value::Node(other) {
                            continue;
                        }
                    } else {
                        row[to_occ.slot] = Value::Node(other);
                    }
                    if !rel_bound {
                        row[r.slot] = Value::Rel(rid);
                    }
                    if self.node_ok(to_occ, other, row, names)? {
                        used.push(rid);
                        let res = self.solve(plan, i + 1, row, names, used, out);
                        used.pop();
                        res?;
                    }
                }
                if !to_bound {
                    row[to_occ.slot] = Value::Null;
                }
                if !rel_bound {
                    row[r.slot] = Value::Null;
                }
            }
        }
        Ok(())
    }

    // ---- UNWIND / CALL ----

    fn unwind(&self, u: &Unwind, names: &mut Vec<String>, rows: Vec<Row>) -> Result<Vec<Row>, ExecError> {
        let mut out = Vec::new();
        for row in rows {
            self.tick()?;
            let v = self.eval(&u.expr, &Env { names, row: &row, aggs: &[] })?;
            let items = match v {
                Value::Null => continue,
                Value::List(items) => items,
                other => vec![other],
            };
            for item in items {
                let mut r = row.clone();
                r.push(item);
                out.push(r);
            }
            self.check_rows(out.len())?;
        }
        names.push(u.alias.clone());
        Ok(out)
    }

    fn call_union(&self, c: &CallUnion, names: &mut Vec<String>, rows: Vec<Row>) -> Result<Vec<Row>, ExecError> {
        let mut columns: Option<Vec<String>> = None;
        let mut out = Vec::new();
        for row in &rows {
            let mut seen = BTreeSet::new();
            for b in &c.branches {
                let (cols, brows) = self.run(&b.clauses, names.clone(), vec![row.clone()])?;
                match &columns {
                    None => columns = Some(cols),
                    Some(prev) if *prev != cols => {
                        return Err(ExecError::Invalid("UNION branches return different columns".into()))
                    }
                    Some(_) => {}
                }
                for br in brows {
                    if !c.all && !seen.insert(row_key(&br)) {
                        continue;
                    }
                    let mut r = row.clone();
                    r.extend(br);
                    out.push(r);
                }
                self.check_rows(out.len())?;
            }
        }
        let columns = match columns {
            Some(c) => c,
            // No incoming rows: column names still come from the branches.
            None => branch_columns(&c.branches[0], names),
        };
        names.extend(columns);
        Ok(out)
    }

    // ---- WITH / RETURN ----

    fn project(&self, p: &Projection, names: &[String], rows: Vec<Row>) -> Result<(Vec<String>, Vec<Row>), ExecError> {
        let items = projection_items(p, names);
        let columns: Vec<String> = items.iter().map(|(n, _)| n.clone()).collect();
        let mut ext_names: Vec<String> = names.to_vec();
        ext_names.extend(columns.iter().cloned());

        let aggregating = items.iter().any(|(_, e)| e.contains_aggregate());
        // (output row, sort key)
        let mut produced: Vec<(Row, Vec<Value>)> = Vec::new();
        if !aggregating {
            for row in &rows {
                self.tick()?;
                let env = Env { names, row, aggs: &[] };
                let out = items.iter().map(|(_, e)| self.eval(e, &env)).collect::<Result<Row, _>>()?;
                let key = self.sort_key(p, &items, &ext_names, row, &out, &[])?;
                produced.push((out, key));
            }
        } else {
            let mut agg_exprs: Vec<&Expr> = Vec::new();
            for (_, e) in &items {
                collect_aggregates(e, &mut agg_exprs);
            }
            for sk in &p.order_by {
                collect_aggregates(&sk.expr, &mut agg_exprs);
            }
            let key_idx: Vec<usize> = (0..items.len()).filter(|&i| !items[i].1.contains_aggregate()).collect();

            struct Group {
                key: Row,
                rep: Row,
                accs: Vec<Acc>,
            }
            let new_accs = || {
                agg_exprs
                    .iter()
                    .map(|e| Acc::new(matches!(e, Expr::Function { distinct: true, .. })))
                    .collect::<Vec<_>>()
            };
            let mut index: BTreeMap<Vec<Ordered>, usize> = BTreeMap::new();
            let mut groups: Vec<Group> = Vec::new();
            for row in &rows {
                self.tick()?;
                let env = Env { names, row, aggs: &[] };
                let key = key_idx.iter().map(|&i| self.eval(&items[i].1, &env)).collect::<Result<Row, _>>()?;
                let gi = *index.entry(row_key(&key)).or_insert_with(|| {
                    groups.push(Group {
                        key,
                        rep: row.clone(),
                        accs: new_accs(),
                    });
                    groups.len() - 1
                });
                for (acc, e) in groups[gi].accs.iter_mut().zip(&agg_exprs) {
                    acc.rows += 1;
                    if let Expr::Function { args, .. } = e {
                        acc.push(self.eval(&args[0], &env)?);
                    }
                }
            }
            if rows.is_empty() && key_idx.is_empty() {
                groups.push(Group {
                    key: Vec::new(),
                    rep: vec![Value::Null; names.len()],
                    accs: new_accs(),
                });
            }
            for g in groups {
                let aggs: Vec<(&Expr, Value)> = agg_exprs
                    .iter()
                    .copied()
                    .zip(g.accs)
                    .map(|(e, acc)| acc.finish(e).map(|v| (e, v)))
                    .collect::<Result<_, _>>()?;
                let env = Env { names, row: &g.rep, aggs: &aggs };
                let mut key_iter = g.key.into_iter();
                let mut out = Vec::with_capacity(items.len());
                for (_, e) in &items {
                    if e.contains_aggregate() {
                        out.push(self.eval(e, &env)?);
                    } else {
                        out.push(key_iter.next().expect("one key value per grouping item"));
                    }
                }
                let key = self.sort_key(p, &items, &ext_names, &g.rep, &out, &aggs)?;
                produced.push((out, key));
            }
        }

        if p.distinct {
            let mut seen = BTreeSet::new();
            produced.retain(|(out, _)| seen.insert(row_key(out)));
        }
        if !p.order_by.is_empty() {
            produced.sort_by(|(_, a), (_, b)| {
                for (s, (x, y)) in p.order_by.iter().zip(a.iter().zip(b)) {
                    let o = order_cmp(x, y);
                    let o = if s.ascending { o } else { o.reverse() };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
        }
        let skip = self.count_expr(p.skip.as_ref(), "SKIP")?.unwrap_or(0);
        let limit = self.count_expr(p.limit.as_ref(), "LIMIT")?;
        let mut out: Vec<Row> = produced
            .into_iter()
            .skip(skip)
            .take(limit.unwrap_or(usize::MAX))
            .map(|(r, _)| r)
            .collect();
        if let Some(w) = &p.where_ {
            let mut kept = Vec::with_capacity(out.len());
            for r in out {
                if truth(&self.eval(w, &Env { names: &columns, row: &r, aggs: &[] })?)? == Some(true) {
                    kept.push(r);
                }
            }
            out = kept;
        }
        Ok((columns, out))
    }

    fn sort_key(
        &self,
        p: &Projection,
        items: &[(String, Expr)],
        ext_names: &[String],
        src: &[Value],
        out: &[Value],
        aggs: &[(&Expr, Value)],
    ) -> Result<Vec<Value>, ExecError> {
        if p.order_by.is_empty() {
            return Ok(Vec::new());
        }
        let mut ext_row: Row = src.to_vec();
        ext_row.extend(out.iter().cloned());
        let env = Env {
            names: ext_names,
            row: &ext_row,
            aggs,
        };
        p.order_by
            .iter()
            .map(|s| match items.iter().position(|(_, e)| *e == s.expr) {
                Some(i) => Ok(out[i].clone()),
                None => self.eval(&s.expr, &env),
            })
            .collect()
    }

    fn count_expr(&self, e: Option<&Expr>, what: &str) -> Result<Option<usize>, ExecError> {
        let Some(e) = e else { return Ok(None) };
        match self.eval(e, &Env { names: &[], row: &[], aggs: &[] })? {
            Value::Int(i) if i >= 0 => Ok(Some(i as usize)),
            other => type_err(format!("{what} expects a non-negative integer, got {}", other.type_name())),
        }
    }

    // ---- expressions ----

    fn eval(&self, e: &Expr, env: &Env) -> Result<Value, ExecError> {
        if e.is_aggregate() {
            return env
                .aggs
                .iter()
                .find(|(a, _)| *a == e)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| ExecError::Invalid(format!("aggregate `{e}` is not allowed here")));
        }
        match e {
            Expr::Literal(l) => Ok(match l {
                Literal::Null => Value::Null,
                Literal::Bool(b) => Value::Bool(*b),
                Literal::Int(i) => Value::Int(*i),
                Literal::Float(x) => Value::Float(*x),
                Literal::Text(s) => Value::Text(s.clone()),
            }),
            Expr::Var(v) => lookup(env.names, v)
                .map(|i| env.row[i].clone())
                .ok_or_else(|| ExecError::Invalid(format!("variable `{v}` is not defined"))),
            Expr::Property(base, key) => {
                let b = self.eval(base, env)?;
                self.property(&b, key)
            }
            Expr::List(items) => Ok(Value::List(
                items.iter().map(|x| self.eval(x, env)).collect::<Result<_, _>>()?,
            )),
            Expr::Unary(UnaryOp::Not, x) => Ok(match truth(&self.eval(x, env)?)? {
                Some(b) => Value::Bool(!b),
                None => Value::Null,
            }),
            Expr::Unary(UnaryOp::Neg, x) => match self.eval(x, env)? {
                Value::Null => Ok(Value::Null),
                Value::Int(i) => i
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or_else(|| ExecError::Type("integer overflow".into())),
                Value::Float(f) => Ok(Value::Float(-f)),
                other => type_err(format!("cannot negate a {}", other.type_name())),
            },
            Expr::Binary(op, a, b) => self.binary(*op, a, b, env),
            Expr::IsNull { expr, negated } => {
                let null = self.eval(expr, env)?.is_null();
                Ok(Value::Bool(null != *negated))
            }
            Expr::Case {
                operand,
                whens,
                else_,
            } => {
                let subject = match operand {
                    Some(o) => Some(self.eval(o, env)?),
                    None => None,
                };
                for (w, t) in whens {
                    let wv = self.eval(w, env)?;
                    let hit = match &subject {
                        Some(s) => equals(s, &wv) == Some(true),
                        None => truth(&wv)? == Some(true),
                    };
                    if hit {
                        return self.eval(t, env);
                    }
                }
                match else_ {
                    Some(x) => self.eval(x, env),
                    None => Ok(Value::Null),
                }
            }
            Expr::Function { name, args, .. } => {
                let vals = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.function(name, vals)
            }
            Expr::CountStar => Err(ExecError::Invalid("count(*) is not allowed here".into())),
            Expr::Index(base, idx) => {
                let b = self.eval(base, env)?;
                let i = self.eval(idx, env)?;
                match (b, i) {
                    (Value::Null, _) | (_, Value::Null) => Ok(Value::Null),
                    (Value::List(items), Value::Int(i)) => {
                        let n = items.len() as i64;
                        let j = if i < 0 { n + i } else { i };
                        Ok(if (0..n).contains(&j) { items[j as usize].clone() } else { Value::Null })
                    }
                    (b @ (Value::Node(_) | Value::Rel(_)), Value::Text(k)) => self.property(&b, &k),
                    (b, i) => type_err(format!("cannot index a {} with a {}", b.type_name(), i.type_name())),
                }
            }
            Expr::HasLabels(base, labels) => match self.eval(base, env)? {
                Value::Null => Ok(Value::Null),
                Value::Node(id) => {
                    let l = &self.g.entity(id).label;
                    Ok(Value::Bool(labels.iter().all(|x| x == l)))
                }
                other => type_err(format!("label predicate on a {}", other.type_name())),
            },
        }
    }

    fn property(&self, base: &Value, key: &str) -> Result<Value, ExecError> {
        let props = match base {
            Value::Null => return Ok(Value::Null),
            Value::Node(id) => &self.g.entity(*id).properties,
            Value::Rel(id) => &self.g.relation(*id).properties,
            Value::Date(d) => {
                return match key {
                    "year" => Ok(Value::Int(d.year() as i64)),
                    "month" => Ok(Value::Int(d.month() as i64)),
                    "day" => Ok(Value::Int(d.day() as i64)),
                    _ => type_err(format!("date has no field `{key}`")),
                }
            }
            other => return type_err(format!("property access `.{key}` on a {}", other.type_name())),
        };
        Ok(props.get(key).map(Value::from).unwrap_or(Value::Null))
    }

    fn binary(&self, op: BinaryOp, a: &Expr, b: &Expr, env: &Env) -> Result<Value, ExecError> {
        match op {
            BinaryOp::And | BinaryOp::Or | BinaryOp::Xor => {
                let x = truth(&self.eval(a, env)?)?;
                // Short-circuit only when the outcome is already decided.
                match (op, x) {
                    (BinaryOp::And, Some(false)) => return Ok(Value::Bool(false)),
                    (BinaryOp::Or, Some(true)) => return Ok(Value::Bool(true)),
                    _ => {}
                }
                let y = truth(&self.eval(b, env)?)?;
                let r = match op {
                    BinaryOp::And => match (x, y) {
                        (Some(false), _) | (_, Some(false)) => Some(false),
                        (Some(true), Some(true)) => Some(true),
                        _ => None,
                    },
                    BinaryOp::Or => match (x, y) {
                        (Some(true), _) | (_, Some(true)) => Some(true),
                        (Some(false), Some(false)) => Some(false),
                        _ => None,
                    },
                    _ => match (x, y) {
                        (Some(p), Some(q)) => Some(p != q),
                        _ => None,
                    },
                };
                return Ok(r.map(Value::Bool).unwrap_or(Value::Null));
            }
            _ => {}
        }
        let x = self.eval(a, env)?;
        let y = self.eval(b, env)?;
        let boolish = |o: Option<bool>| o.map(Value::Bool).unwrap_or(Value::Null);
        Ok(match op {
            BinaryOp::Eq => boolish(equals(&x, &y)),
            BinaryOp::Ne => boolish(equals(&x, &y).map(|b| !b)),
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                boolish(compare(&x, &y).map(|o| match op {
                    BinaryOp::Lt => o == Ordering::Less,
                    BinaryOp::Le => o != Ordering::Greater,
                    BinaryOp::Gt => o == Ordering::Greater,
                    _ => o != Ordering::Less,
                }))
            }
            BinaryOp::In => match y {
                Value::Null => Value::Null,
                Value::List(items) => {
                    let mut saw_null = false;
                    for it in &items {
                        match equals(&x, it) {
                            Some(true) => return Ok(Value::Bool(true)),
                            None => saw_null = true,
                            Some(false) => {}
                        }
                    }
                    if saw_null {
                        Value::Null
                    } else {
                        Value::Bool(false)
                    }
                }
                other => return type_err(format!("IN expects a list, got {}", other.type_name())),
            },
            BinaryOp::StartsWith | BinaryOp::EndsWith | BinaryOp::Contains => match (&x, &y) {
                (Value::Text(s), Value::Text(t)) => Value::Bool(match op {
                    BinaryOp::StartsWith => s.starts_with(t.as_str()),
                    BinaryOp::EndsWith => s.ends_with(t.as_str()),
                    _ => s.contains(t.as_str()),
                }),
                _ => Value::Null,
            },
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => arithmetic(op, x, y)?,
            BinaryOp::And | BinaryOp::Or | BinaryOp::Xor => unreachable!("handled above"),
        })
    }

    fn function(&self, name: &str, mut args: Vec<Value>) -> Result<Value, ExecError> {
        let lname = name.to_ascii_lowercase();
        let arity = |n: usize| -> Result<(), ExecError> {
            if args.len() == n {
                Ok(())
            } else {
                type_err(format!("{name}() expects {n} argument(s), got {}", args.len()))
            }
        };
        if lname == "coalesce" {
            return Ok(args.into_iter().find(|v| !v.is_null()).unwrap_or(Value::Null));
        }
        if lname == "exists" {
            arity(1)?;
            return Ok(Value::Bool(!args[0].is_null()));
        }
        match lname.as_str() {
            "substring" | "replace" if args.len() == 3 => {}
            "substring" | "split" | "left" | "right" => arity(if args.len() == 3 { 3 } else { 2 })?,
            "replace" => arity(3)?,
            "date" if args.is_empty() => {
                return type_err("date() without an argument depends on the clock".into());
            }
            _ => arity(1)?,
        }
        if args.iter().any(Value::is_null) {
            return Ok(Value::Null);
        }
        let bad = |v: &Value| type_err(format!("{name}() does not accept a {}", v.type_name()));
        let a = args.remove(0);
        match lname.as_str() {
            "date" => match a {
                Value::Date(d) => Ok(Value::Date(d)),
                Value::Text(s) => parse_date_text(&s)
                    .map(Value::Date)
                    .ok_or_else(|| ExecError::Type(format!("`{s}` is not a valid date"))),
                other => bad(&other),
            },
            "tolower" | "toupper" | "trim" | "ltrim" | "rtrim" => match a {
                Value::Text(s) => Ok(Value::Text(match lname.as_str() {
                    "tolower" => s.to_lowercase(),
                    "toupper" => s.to_uppercase(),
                    "trim" => s.trim().into(),
                    "ltrim" => s.trim_start().into(),
                    _ => s.trim_end().into(),
                })),
                other => bad(&other),
            },
            "size" | "length" => match a {
                Value::Text(s) => Ok(Value::Int(s.chars().count() as i64)),
                Value::List(l) => Ok(Value::Int(l.len() as i64)),
                other => bad(&other),
            },
            "tostring" => match a {
                Value::Text(s) => Ok(Value::Text(s)),
                Value::Int(i) => Ok(Value::Text(i.to_string())),
                Value::Float(x) => Ok(Value::Text(format!("{x:?}"))),
                Value::Bool(b) => Ok(Value::Text(b.to_string())),
                Value::Date(d) => Ok(Value::Text(d.to_string())),
                other => bad(&other),
            },
            "tointeger" => match a {
                Value::Int(i) => Ok(Value::Int(i)),
                Value::Float(x) => Ok(float_to_int(x)),
                Value::Text(s) => {
                    let t = s.trim();
                    Ok(match t.parse::<i64>() {
                        Ok(i) => Value::Int(i),
                        Err(_) => t.parse::<f64>().map(float_to_int).unwrap_or(Value::Null),
                    })
                }
                Value::Bool(b) => Ok(Value::Int(b as i64)),
                other => bad(&other),
            },
            "tofloat" => match a {
                Value::Int(i) => Ok(Value::Float(i as f64)),
                Value::Float(x) => Ok(Value::Float(x)),
                Value::Text(s) => Ok(s.trim().parse::<f64>().map(Value::Float).unwrap_or(Value::Null)),
                other => bad(&other),
            },
            "toboolean" => match a {
                Value::Bool(b) => Ok(Value::Bool(b)),
                Value::Text(s) if s.eq_ignore_ascii_case("true") => Ok(Value::Bool(true)),
                Value::Text(s) if s.eq_ignore_ascii_case("false") => Ok(Value::Bool(false)),
                Value::Text(_) => Ok(Value::Null),
                other => bad(&other),
            },
            "abs" | "round" | "floor" | "ceil" | "sqrt" | "sign" => match a {
                Value::Int(i) => match lname.as_str() {
                    "abs" => i
                        .checked_abs()
                        .map(Value::Int)
                        .ok_or_else(|| ExecError::Type("integer overflow".into())),
                    "sign" => Ok(Value::Int(i.signum())),
                    "sqrt" => Ok(Value::Float(libm::sqrt(i as f64))),
                    _ => Ok(Value::Float(i as f64)),
                },
                Value::Float(x) => Ok(match lname.as_str() {
                    "abs" => Value::Float(x.abs()),
                    "round" => Value::Float(libm::round(x)),
                    "floor" => Value::Float(libm::floor(x)),
                    "ceil" => Value::Float(libm::ceil(x)),
                    "sqrt" => Value::Float(libm::sqrt(x)),
                    _ => Value::Int(if x > 0.0 {
                        1
                    } else if x < 0.0 {
                        -1
                    } else {
                        0
                    }),
                }),
                other => bad(&other),
            },
            "type" => match a {
                Value::Rel(r) => Ok(Value::Text(self.g.relation(r).label.clone())),
                other => bad(&other),
            },
            "labels" => match a {
                Value::Node(n) => Ok(Value::List(vec![Value::Text(self.g.entity(n).label.clone())])),
                other => bad(&other),
            },
            "id" => match a {
                Value::Node(n) => Ok(Value::Int(n.0 as i64)),
                Value::Rel(r) => Ok(Value::Int(r.0 as i64)),
                other => bad(&other),
            },
            "elementid" => match a {
                Value::Node(n) => Ok(Value::Text(self.g.entity(n).eid.clone())),
                Value::Rel(r) => Ok(Value::Text(self.g.relation(r).rid.clone())),
                other => bad(&other),
            },
            "keys" => {
                let props = match a {
                    Value::Node(n) => &self.g.entity(n).properties,
                    Value::Rel(r) => &self.g.relation(r).properties,
                    other => return bad(&other),
                };
                Ok(Value::List(props.keys().map(|k| Value::Text(k.clone())).collect()))
            }
            "head" | "last" => match a {
                Value::List(l) => Ok(if lname == "head" { l.first() } else { l.last() }
                    .cloned()
                    .unwrap_or(Value::Null)),
                other => bad(&other),
            },
            "reverse" => match a {
                Value::List(mut l) => {
                    l.reverse();
                    Ok(Value::List(l))
                }
                Value::Text(s) => Ok(Value::Text(s.chars().rev().collect())),
                other => bad(&other),
            },
            "substring" | "left" | "right" | "split" | "replace" => {
                let Value::Text(s) = a else { return bad(&a) };
                let int_arg = |v: &Value| match v {
                    Value::Int(i) if *i >= 0 => Ok(*i as usize),
                    other => type_err(format!("{name}() expects a non-negative integer, got {}", other.type_name())),
                };
                let text_arg = |v: &Value| match v {
                    Value::Text(t) => Ok(t.clone()),
                    other => type_err(format!("{name}() expects a string, got {}", other.type_name())),
                };
                let chars: Vec<char> = s.chars().collect();
                match lname.as_str() {
                    "substring" => {
                        let start = int_arg(&args[0])?.min(chars.len());
                        let len = match args.get(1) {
                            Some(v) => int_arg(v)?,
                            None => chars.len(),
                        };
                        Ok(Value::Text(chars[start..].iter().take(len).collect()))
                    }
                    "left" => Ok(Value::Text(chars.iter().take(int_arg(&args[0])?).collect())),
                    "right" => {
                        let n = int_arg(&args[0])?.min(chars.len());
                        Ok(Value::Text(chars[chars.len() - n..].iter().collect()))
                    }
                    "split" => {
                        let d = text_arg(&args[0])?;
                        Ok(Value::List(s.split(d.as_str()).map(|p| Value::Text(p.into())).collect()))
                    }
                    _ => {
                        let from = text_arg(&args[0])?;
                        let to = text_arg(&args[1])?;
                        Ok(Value::Text(s.replace(from.as_str(), &to)))
                    }
                }
            }
            _ => Err(ExecError::Invalid(format!("unknown function `{name}`"))),
        }
    }
}

fn float_to_int(x: f64) -> Value {
    if x.is_finite() && x.abs() < 9.2e18 {
        Value::Int(libm::trunc(x) as i64)
    } else {
        Value::Null
    }
}

/// Accepts `YYYY`, `YYYY-MM` and `YYYY-MM-DD`.
fn parse_date_text(s: &str) -> Option<Date> {
    if let Ok(d) = Date::parse_iso(s) {
        return Some(d);
    }
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    let parts: Vec<&str> = s.split('-').collect();
    match parts.as_slice() {
        [y] if y.len() == 4 && digits(y) => Date::new(y.parse().ok()?, 1, 1).ok(),
        [y, m] if y.len() == 4 && m.len() == 2 && digits(y) && digits(m) => {
            Date::new(y.parse().ok()?, m.parse().ok()?, 1).ok()
        }
        _ => None,
    }
}

fn truth(v: &Value) -> Result<Option<bool>, ExecError> {
    match v {
        Value::Bool(b) => Ok(Some(*b)),
        Value::Null => Ok(None),
        other => type_err(format!("expected a boolean, got {}", other.type_name())),
    }
}

fn arithmetic(op: BinaryOp, x: Value, y: Value) -> Result<Value, ExecError> {
    let overflow = || ExecError::Type("integer overflow".into());
    match (op, x, y) {
        (_, Value::Null, _) | (_, _, Value::Null) => Ok(Value::Null),
        (BinaryOp::Add, Value::List(mut a), Value::List(b)) => {
            a.extend(b);
            Ok(Value::List(a))
        }
        (BinaryOp::Add, Value::List(mut a), b) => {
            a.push(b);
            Ok(Value::List(a))
        }
        (BinaryOp::Add, a, Value::List(mut b)) => {
            b.insert(0, a);
            Ok(Value::List(b))
        }
        (BinaryOp::Add, Value::Text(a), Value::Text(b)) => Ok(Value::Text(a + &b)),
        (BinaryOp::Add, Value::Text(a), Value::Int(b)) => Ok(Value::Text(format!("{a}{b}"))),
        (BinaryOp::Add, Value::Text(a), Value::Float(b)) => Ok(Value::Text(format!("{a}{b:?}"))),
        (BinaryOp::Add, Value::Int(a), Value::Text(b)) => Ok(Value::Text(format!("{a}{b}"))),
        (BinaryOp::Add, Value::Float(a), Value::Text(b)) => Ok(Value::Text(format!("{a:?}{b}"))),
        (op, Value::Int(a), Value::Int(b)) => match op {
            BinaryOp::Add => a.checked_add(b).map(Value::Int).ok_or_else(overflow),
            BinaryOp::Sub => a.checked_sub(b).map(Value::Int).ok_or_else(overflow),
            BinaryOp::Mul => a.checked_mul(b).map(Value::Int).ok_or_else(overflow),
            BinaryOp::Div if b == 0 => type_err("division by zero".into()),
            BinaryOp::Div => a.checked_div(b).map(Value::Int).ok_or_else(overflow),
            BinaryOp::Mod if b == 0 => type_err("division by zero".into()),
            _ => a.checked_rem(b).map(Value::Int).ok_or_else(overflow),
        },
        (op, a @ (Value::Int(_) | Value::Float(_)), b @ (Value::Int(_) | Value::Float(_))) => {
            let f = |v: &Value| match v {
                Value::Int(i) => *i as f64,
                Value::Float(x) => *x,
                _ => unreachable!(),
            };
            let (a, b) = (f(&a), f(&b));
            Ok(Value::Float(match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a / b,
                _ => libm::fmod(a, b),
            }))
        }
        (op, a, b) => type_err(format!(
            "cannot apply `{}` to {} and {}",
            op.symbol(),
            a.type_name(),
            b.type_name()
        )),
    }
}

fn collect_aggregates<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    e.walk(&mut |x| {
        if x.is_aggregate() && !out.contains(&x) {
            out.push(x);
        }
    });
}

fn projection_items(p: &Projection, names: &[String]) -> Vec<(String, Expr)> {
    let mut items = Vec::new();
    if p.star {
        let mut visible: Vec<&String> = names.iter().filter(|n| !is_hidden(n)).collect();
        visible.sort();
        visible.dedup();
        items.extend(visible.into_iter().map(|n| (n.clone(), Expr::Var(n.clone()))));
    }
    items.extend(p.items.iter().map(|i| (i.column_name(), i.expr.clone())));
    items
}

fn branch_columns(q: &Query, outer: &[String]) -> Vec<String> {
    let mut names: Vec<String> = outer.to_vec();
    for c in &q.clauses {
        match c {
            Clause::Match(m) => {
                for p in &m.patterns {
                    for v in p.nodes.iter().filter_map(|n| n.var.as_ref()).chain(p.rels.iter().filter_map(|r| r.var.as_ref())) {
                        if !names.contains(v) {
                            names.push(v.clone());
                        }
                    }
                }
            }
            Clause::Unwind(u) => names.push(u.alias.clone()),
            Clause::With(p) => names = projection_items(p, &names).into_iter().map(|(n, _)| n).collect(),
            Clause::Return(p) => return projection_items(p, &names).into_iter().map(|(n, _)| n).collect(),
            Clause::CallUnion(c) => {
                let cols = branch_columns(&c.branches[0], &names);
                names.extend(cols);
            }
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::parse_query;
    use crate::cypher::table::{serialize_cell, Cell};
    use crate::graph::{Entity, Relation};
    use crate::schema::{EntitySchema, GraphSchema, PropertySchema, RelationSchema};
    use crate::value::Datatype;

    fn graph() -> PropertyGraph {
        let schema = GraphSchema {
            name: "t".into(),
            entities: vec![EntitySchema {
                label: "Taxon".into(),
                properties: vec![PropertySchema::new("lifespan", Datatype::Int)],
            }],
            relations: vec![RelationSchema {
                label: "feedsOn".into(),
                subj_label: "Taxon".into(),
                obj_label: "Taxon".into(),
                properties: vec![],
                time_sensitive: false,
                characteristics: Default::default(),
            }],
        }
        .normalize()
        .unwrap();
        PropertyGraph::assemble(
            schema,
            vec![
                Entity::new("a", "Taxon", "A").with("lifespan", 10i64),
                Entity::new("b", "Taxon", "B").with("lifespan", 20i64),
                Entity::new("c", "Taxon", "C"),
                Entity::new("l", "Taxon", "Leporidae"),
            ],
            vec![
                Relation::new("r1", "feedsOn", "a", "l"),
                Relation::new("r2", "feedsOn", "b", "l"),
                Relation::new("r3", "feedsOn", "c", "l"),
            ],
        )
        .unwrap()
    }

    fn run(q: &str) -> Vec<Vec<String>> {
        let q = parse_query(q).unwrap();
        execute(&q, &graph(), &Budget::unlimited()).unwrap().serialized_rows()
    }

    #[test]
    fn average_ignores_nulls() {
        let t = execute(
            &parse_query("MATCH (n:Taxon)-[:feedsOn]->(:Taxon {name: 'Leporidae'}) RETURN avg(n.lifespan)").unwrap(),
            &graph(),
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(t.rows, vec![vec![Cell::Float(15.0)]]);
    }

    #[test]
    fn relationships_are_distinct_within_a_match() {
        let rows = run("MATCH (n)-[r0]->(m0), (n)-[r1]->(m1) RETURN n.name, r0, r1");
        assert!(rows.is_empty());
        let rows = run("MATCH (n)-[r0]->(m0) MATCH (n)-[r1]->(m1) RETURN n.name");
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn aggregation_over_nothing_yields_one_row() {
        assert_eq!(run("MATCH (n:Nope) RETURN count(n), max(n.x)"), vec![vec!["0".to_string(), "∅".into()]]);
        assert!(run("MATCH (n:Nope) RETURN n.name, count(n)").is_empty());
    }

    #[test]
    fn nulls_sort_last_ascending_first_descending() {
        let asc = run("MATCH (n:Taxon) WHERE n.name <> 'Leporidae' RETURN n.lifespan ORDER BY n.lifespan");
        assert_eq!(asc.concat(), ["10", "20", "∅"]);
        let desc = run("MATCH (n:Taxon) WHERE n.name <> 'Leporidae' RETURN n.lifespan AS x ORDER BY x DESC");
        assert_eq!(desc.concat(), ["∅", "20", "10"]);
    }

    #[test]
    fn optional_match_null_extends() {
        let rows = run("MATCH (n:Taxon) OPTIONAL MATCH (n)<-[:feedsOn]-(m) RETURN n.name, m.name ORDER BY n.name, m.name");
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], ["A", "∅"]);
        assert_eq!(rows[3], ["Leporidae", "A"]);
    }

    #[test]
    fn avg_over_text_is_a_type_error() {
        let q = parse_query("MATCH (n:Taxon) RETURN avg(n.name)").unwrap();
        assert!(matches!(execute(&q, &graph(), &Budget::unlimited()), Err(ExecError::Type(_))));
    }

    #[test]
    fn unwind_drops_null_and_empty() {
        assert_eq!(run("UNWIND [1, null, 2] AS x RETURN x").concat(), ["1", "∅", "2"]);
        assert!(run("MATCH (n:Taxon) UNWIND n.nothing AS x RETURN x").is_empty());
        assert!(run("UNWIND [] AS x RETURN x").is_empty());
    }

    #[test]
    fn group_by_and_collect() {
        let rows = run("MATCH (n)-[:feedsOn]->(m) WITH m, collect(n.name) AS eaters RETURN m.name, eaters");
        assert_eq!(rows, vec![vec!["Leporidae".to_string(), "[A, B, C]".into()]]);
        let t = execute(
            &parse_query("MATCH (n)-[:feedsOn]->(m) RETURN count(DISTINCT m) AS c").unwrap(),
            &graph(),
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(serialize_cell(&t.rows[0][0]), "1");
    }

    #[test]
    fn row_budget_is_enforced() {
        let q = parse_query("MATCH (a), (b) RETURN a.name, b.name").unwrap();
        let budget = Budget::unlimited().with_max_rows(10);
        assert_eq!(execute(&q, &graph(), &budget), Err(ExecError::RowLimit { limit: 10 }));
        let budget = Budget::unlimited().with_max_intermediate_rows(Some(5));
        assert!(matches!(execute(&q, &graph(), &budget), Err(ExecError::IntermediateLimit { .. })));
    }

    #[test]
    fn expired_deadline_times_out() {
        let q = parse_query("MATCH (a), (b), (c) RETURN count(*)").unwrap();
        let expired = || true;
        assert_eq!(execute(&q, &graph(), &Budget::new(&expired)), Err(ExecError::Timeout));
    }

    #[test]
    fn union_dedupes_unless_all() {
        let u = "CALL { MATCH (n:Taxon {name: 'A'}) RETURN n UNION MATCH (n)-[:feedsOn]->() RETURN n } RETURN n.name";
        assert_eq!(run(u).len(), 3);
        assert_eq!(run(&u.replace("UNION", "UNION ALL")).len(), 4);
    }

    #[test]
    fn case_and_string_predicates() {
        let rows = run(
            "MATCH (n:Taxon) WHERE n.name STARTS WITH 'L' OR n.name ENDS WITH 'B' \
             RETURN n.name, CASE WHEN n.lifespan IS NULL THEN 'unknown' ELSE 'known' END AS k ORDER BY n.name",
        );
        assert_eq!(rows, vec![vec!["B".to_string(), "known".into()], vec!["Leporidae".into(), "unknown".into()]]);
    }
}
