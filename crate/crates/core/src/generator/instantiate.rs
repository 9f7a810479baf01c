//! Filling pattern skeletons with labels, names and RETURN templates.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use super::pattern::{skeletons, CmpOp, MatchInstance};
use super::rules::{check_realisticness, RuleSet};
use crate::budget::Budget;
use crate::cypher::ast::{ident, write_string_literal};
use crate::cypher::{execute, parse_query, Cell, ExecError, ResultTable};
use crate::graph::PropertyGraph;
use crate::schema::NAME_PROPERTY;
use crate::task::{PatternId, ReturnTemplateId};
use crate::value::{Datatype, Date};

/// Rows any single discovery query may hold before the draw is abandoned.
pub const DISCOVERY_ROWS: usize = 500_000;

/// Rejection and skip reasons, counted per generation cell.
pub type Reasons = BTreeMap<String, usize>;

fn bump(reasons: &mut Reasons, key: &str) {
    *reasons.entry(key.into()).or_default() += 1;
}

/// Schema-derived candidates plus a cache of discovery results on the sample.
pub struct Catalog<'g> {
    pub full: &'g PropertyGraph,
    pub sample: &'g PropertyGraph,
    pub rules: RuleSet,
    skeletons: BTreeMap<PatternId, Vec<MatchInstance>>,
    cache: BTreeMap<String, Option<Vec<Vec<Cell>>>>,
}

impl<'g> Catalog<'g> {
    pub fn new(full: &'g PropertyGraph, sample: &'g PropertyGraph) -> Self {
        let schema = full.schema();
        let rules = RuleSet::from_schema(schema);
        let mut sk = BTreeMap::new();
        for p in PatternId::ALL {
            let mut list = skeletons(p, schema);
            match p {
                PatternId::TimeSensitive => list.retain(|m| {
                    let r = &m.edges[0].label;
                    schema.relation(r).is_some_and(|rs| rs.time_sensitive)
                        && schema.relation_property(r, "start_year") == Some(Datatype::Int)
                }),
                PatternId::Comparison => list.retain(|m| !orderable_props(full, &m.nodes[0].label).is_empty()),
                _ => {}
            }
            sk.insert(p, list);
        }
        Catalog {
            full,
            sample,
            rules,
            skeletons: sk,
            cache: BTreeMap::new(),
        }
    }

    pub fn skeletons(&self, p: PatternId) -> &[MatchInstance] {
        self.skeletons.get(&p).map(Vec::as_slice).unwrap_or_default()
    }

    fn discover(&mut self, query: String, budget: &Budget) -> Option<&Vec<Vec<Cell>>> {
        let sample = self.sample;
        self.cache
            .entry(query)
            .or_insert_with_key(|q| {
                let parsed = parse_query(q).ok()?;
                let b = budget.with_max_intermediate_rows(Some(DISCOVERY_ROWS));
                execute(&parsed, sample, &b).ok().map(|t| t.rows)
            })
            .as_ref()
    }
}

fn props_of(g: &PropertyGraph, label: &str) -> Vec<(String, Datatype)> {
    g.schema()
        .entity(label)
        .map(|e| {
            e.properties
                .iter()
                .filter(|p| p.name != NAME_PROPERTY)
                .map(|p| (p.name.clone(), p.datatype))
                .collect()
        })
        .unwrap_or_default()
}

fn orderable_props(g: &PropertyGraph, label: &str) -> Vec<String> {
    props_of(g, label)
        .into_iter()
        .filter(|(_, d)| d.is_orderable())
        .map(|(p, _)| p)
        .collect()
}

fn text(c: &Cell) -> Option<&str> {
    match c {
        Cell::Text(s) => Some(s),
        _ => None,
    }
}

fn int(c: &Cell) -> Option<i64> {
    match c {
        Cell::Int(i) => Some(*i),
        _ => None,
    }
}

/// Discovery queries for a skeleton; each returns the names for its named nodes.
fn discovery_queries(m: &MatchInstance) -> Vec<String> {
    use PatternId::*;
    let n0 = m.node_text(0, false);
    match m.pattern {
        Basic1 | Basic3 | Basic7 => alloc::vec![format!("{} RETURN n.name LIMIT 1", m.render(false))],
        Basic2 => alloc::vec![format!("MATCH {n0} RETURN DISTINCT n.name")],
        Basic4 => alloc::vec![format!("{} RETURN DISTINCT m0.name", m.render(false))],
        Basic5 | GroupBy => alloc::vec![format!("{} RETURN DISTINCT m1.name", m.render(false))],
        Basic6 => alloc::vec![format!("{} RETURN DISTINCT m0.name, m1.name", m.render(false))],
        OptionalMatch => alloc::vec![format!("MATCH {n0}{} RETURN DISTINCT m1.name", m.hop(0, 1, 2, false))],
        TimeSensitive => alloc::vec![format!(
            "MATCH {n0}{} RETURN m0.name, r0.start_year, r0.end_year",
            m.hop(0, 0, 1, false)
        )],
        Union => alloc::vec![
            format!("MATCH {n0}{} RETURN DISTINCT m0.name", m.hop(0, 0, 1, false)),
            format!("MATCH {n0}{} RETURN DISTINCT m1.name", m.hop(0, 1, 2, false)),
        ],
        Comparison => Vec::new(),
    }
}

/// Samples one realistic, non-empty MATCH instance, or `None` once `draws`
/// attempts are spent. Reasons for every failed draw are tallied.
pub fn instantiate_match<R: Rng>(
    cat: &mut Catalog,
    pattern: PatternId,
    draws: usize,
    budget: &Budget,
    rng: &mut R,
    reasons: &mut Reasons,
) -> Option<MatchInstance> {
    if cat.skeletons(pattern).is_empty() {
        bump(reasons, "no-schema-candidate");
        return None;
    }
    for _ in 0..draws {
        if budget.deadline.expired() {
            bump(reasons, "timeout");
            return None;
        }
        let mut m = cat.skeletons(pattern).choose(rng).cloned()?;
        if let Err(r) = check_realisticness(&m, &cat.rules) {
            bump(reasons, r.rule.as_str());
            continue;
        }
        let filled = if pattern == PatternId::Comparison {
            fill_comparison(cat, &mut m, budget, rng)
        } else {
            fill_names(cat, &mut m, budget, rng)
        };
        if let Err(why) = filled {
            bump(reasons, why);
            continue;
        }
        if let Err(r) = check_realisticness(&m, &cat.rules) {
            bump(reasons, r.rule.as_str());
            continue;
        }
        return Some(m);
    }
    bump(reasons, "draws-exhausted");
    None
}

fn fill_names<R: Rng>(cat: &mut Catalog, m: &mut MatchInstance, budget: &Budget, rng: &mut R) -> Result<(), &'static str> {
    let queries = discovery_queries(m);
    let mut picks: Vec<Vec<Cell>> = Vec::new();
    for q in queries {
        let rows = cat.discover(q, budget).ok_or("discovery-limit")?;
        let row = rows.choose(rng).ok_or("no-solution")?;
        picks.push(row.clone());
    }
    let cells: Vec<Cell> = picks.into_iter().flatten().collect();
    match m.pattern {
        PatternId::Basic1 | PatternId::Basic3 | PatternId::Basic7 => Ok(()),
        PatternId::TimeSensitive => {
            let name = text(&cells[0]).ok_or("no-solution")?;
            let start = int(&cells[1]).ok_or("missing-start-year")?;
            let end = match &cells[2] {
                Cell::Null => start + 10,
                c => int(c).ok_or("missing-start-year")?,
            };
            if end < start {
                return Err("inverted-interval");
            }
            m.nodes[1].name = Some(name.into());
            m.year = Some(rng.gen_range(start..=end));
            Ok(())
        }
        _ => {
            let named: Vec<usize> = (0..m.nodes.len())
                .filter(|&i| super::pattern::shape(m.pattern).nodes[i].named)
                .collect();
            for (i, c) in named.into_iter().zip(&cells) {
                m.nodes[i].name = Some(text(c).ok_or("no-solution")?.into());
            }
            Ok(())
        }
    }
}

fn fill_comparison<R: Rng>(cat: &mut Catalog, m: &mut MatchInstance, budget: &Budget, rng: &mut R) -> Result<(), &'static str> {
    let label = m.nodes[0].label.clone();
    let prop = orderable_props(cat.full, &label).choose(rng).cloned().ok_or("no-property")?;
    let q = format!(
        "MATCH (n:{l}) WHERE n.{p} IS NOT NULL RETURN n.name, n.{p}",
        l = ident(&label),
        p = ident(&prop)
    );
    let full = cat.full;
    let rows = cat.discover(q, budget).ok_or("discovery-limit")?.clone();
    let unique = |name: &str| full.entities_named(Some(&label), name).len() == 1;
    for _ in 0..16 {
        let (Some(a), Some(b)) = (rows.choose(rng), rows.choose(rng)) else {
            return Err("no-solution");
        };
        let (Some(na), Some(nb)) = (text(&a[0]), text(&b[0])) else {
            continue;
        };
        if na == nb || !unique(na) || !unique(nb) || cell_order(&a[1], &b[1]) == Ordering::Equal {
            continue;
        }
        m.nodes[0].name = Some(na.into());
        m.nodes[1].name = Some(nb.into());
        m.compare = Some((prop, if rng.gen_bool(0.5) { CmpOp::Gt } else { CmpOp::Lt }));
        return Ok(());
    }
    Err("no-distinct-pair")
}

fn cell_order(a: &Cell, b: &Cell) -> Ordering {
    match (a, b) {
        (Cell::Date(x), Cell::Date(y)) => x.cmp(y),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
            _ => Ordering::Equal,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFn {
    Count,
    Min,
    Max,
    Avg,
    Sum,
}

impl AggFn {
    pub fn as_str(self) -> &'static str {
        match self {
            AggFn::Count => "count",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Avg => "avg",
            AggFn::Sum => "sum",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            AggFn::Count => "number of",
            AggFn::Min => "minimum",
            AggFn::Max => "maximum",
            AggFn::Avg => "average",
            AggFn::Sum => "total",
        }
    }

    /// Datatypes the function may be applied to.
    pub fn accepts(self, d: Datatype) -> bool {
        match self {
            AggFn::Count => true,
            AggFn::Min | AggFn::Max => d.is_orderable(),
            AggFn::Avg | AggFn::Sum => d.is_numeric(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
}

impl FilterOp {
    /// Operators allowed for a property datatype.
    pub fn for_datatype(d: Datatype) -> &'static [FilterOp] {
        use FilterOp::*;
        match d {
            Datatype::Str => &[Eq, Ne],
            Datatype::Int | Datatype::Float | Datatype::Date => &[Lt, Le, Gt, Ge, Eq, Ne],
            Datatype::ListStr => &[In, NotIn],
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            FilterOp::Eq => "=",
            FilterOp::Ne => "<>",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Gt => ">",
            FilterOp::Ge => ">=",
            FilterOp::In | FilterOp::NotIn => "IN",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            FilterOp::Eq => "is",
            FilterOp::Ne => "is not",
            FilterOp::Lt => "is less than",
            FilterOp::Le => "is at most",
            FilterOp::Gt => "is greater than",
            FilterOp::Ge => "is at least",
            FilterOp::In => "includes",
            FilterOp::NotIn => "does not include",
        }
    }

    fn is_ordering(self) -> bool {
        matches!(self, FilterOp::Lt | FilterOp::Le | FilterOp::Gt | FilterOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterValue {
    Text(String),
    Int(i64),
    Float(f64),
    Date(Date),
}

impl FilterValue {
    fn cypher(&self) -> String {
        match self {
            FilterValue::Text(s) => {
                let mut out = String::new();
                let _ = write_string_literal(&mut out, s);
                out
            }
            FilterValue::Int(i) => i.to_string(),
            FilterValue::Float(x) => format!("{x:?}"),
            FilterValue::Date(d) => format!("date('{d}')"),
        }
    }

    fn describe(&self) -> String {
        match self {
            FilterValue::Text(s) => format!("\"{s}\""),
            FilterValue::Int(i) => i.to_string(),
            FilterValue::Float(x) => x.to_string(),
            FilterValue::Date(d) => d.to_string(),
        }
    }
}

/// An instantiated RETURN part.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnSpec {
    Name,
    Property { prop: String },
    PropertyList { prop: String },
    Sort { prop: String, ascending: bool },
    Argmax { prop: String, descending: bool },
    Filter { prop: String, op: FilterOp, value: FilterValue },
    Aggregate { func: AggFn, prop: Option<String> },
    /// The dedicated RETURN of a special pattern.
    Special,
}

impl ReturnSpec {
    pub fn template(&self) -> ReturnTemplateId {
        match self {
            ReturnSpec::Name => ReturnTemplateId::Name,
            ReturnSpec::Property { .. } | ReturnSpec::PropertyList { .. } => ReturnTemplateId::Property,
            ReturnSpec::Sort { .. } => ReturnTemplateId::Sort,
            ReturnSpec::Argmax { .. } => ReturnTemplateId::Argmax,
            ReturnSpec::Filter { .. } => ReturnTemplateId::Filter,
            ReturnSpec::Aggregate { .. } => ReturnTemplateId::Aggregate,
            ReturnSpec::Special => ReturnTemplateId::Special,
        }
    }

    /// Key of the question-text template.
    pub fn text_key(&self) -> &'static str {
        match self {
            ReturnSpec::Property { .. } => "PROPERTY",
            ReturnSpec::PropertyList { .. } => "PROPERTY_LIST",
            ReturnSpec::Aggregate { func: AggFn::Count, .. } => "AGGREGATE_COUNT",
            other => other.template().as_str(),
        }
    }

    pub fn text_vars(&self, vars: &mut BTreeMap<&'static str, String>) {
        match self {
            ReturnSpec::Property { prop } | ReturnSpec::PropertyList { prop } => {
                vars.insert("prop", prop.clone());
            }
            ReturnSpec::Sort { prop, ascending } => {
                vars.insert("prop", prop.clone());
                vars.insert("order", (if *ascending { "ascending" } else { "descending" }).into());
            }
            ReturnSpec::Argmax { prop, descending } => {
                vars.insert("prop", prop.clone());
                vars.insert("extreme", (if *descending { "highest" } else { "lowest" }).into());
            }
            ReturnSpec::Filter { prop, op, value } => {
                vars.insert("prop", prop.clone());
                vars.insert("op", op.describe().into());
                vars.insert("value", value.describe());
            }
            ReturnSpec::Aggregate { func, prop } => {
                vars.insert("fn", func.describe().into());
                vars.insert("prop", prop.clone().unwrap_or_default());
            }
            ReturnSpec::Name | ReturnSpec::Special => {}
        }
    }
}

/// Full gold Cypher for a MATCH instance and RETURN spec.
pub fn gold_cypher(m: &MatchInstance, r: &ReturnSpec) -> String {
    let head = m.render(true);
    let p = |s: &String| ident(s);
    match (m.pattern, r) {
        (PatternId::Comparison, _) => {
            let (prop, op) = m.compare.clone().unwrap_or((String::from("name"), CmpOp::Gt));
            format!(
                "{head} RETURN CASE WHEN n.{pp} {} m0.{pp} THEN n.name ELSE m0.name END AS answer",
                op.symbol(),
                pp = ident(&prop)
            )
        }
        (PatternId::GroupBy | PatternId::OptionalMatch, _) => {
            format!("{head} WITH n, count(DISTINCT m0) AS num RETURN n.name, num")
        }
        (_, ReturnSpec::Name | ReturnSpec::Special) => format!("{head} WITH DISTINCT n RETURN n.name"),
        (_, ReturnSpec::Property { prop }) => format!("{head} WITH DISTINCT n RETURN n.{}", p(prop)),
        (_, ReturnSpec::PropertyList { prop }) => {
            format!("{head} WITH DISTINCT n UNWIND n.{} AS prop RETURN DISTINCT prop", p(prop))
        }
        (_, ReturnSpec::Sort { prop, ascending }) => format!(
            "{head} WITH DISTINCT n RETURN n.name ORDER BY n.{} {}",
            p(prop),
            if *ascending { "ASC" } else { "DESC" }
        ),
        (_, ReturnSpec::Argmax { prop, descending }) => format!(
            "{head} WITH DISTINCT n WHERE n.{pp} IS NOT NULL RETURN n.name ORDER BY n.{pp} {} LIMIT 1",
            if *descending { "DESC" } else { "ASC" },
            pp = p(prop)
        ),
        (_, ReturnSpec::Filter { prop, op, value }) => {
            let cond = match op {
                FilterOp::In => format!("{} IN n.{}", value.cypher(), p(prop)),
                FilterOp::NotIn => format!("NOT {} IN n.{}", value.cypher(), p(prop)),
                _ => format!("n.{} {} {}", p(prop), op.symbol(), value.cypher()),
            };
            format!("{head} WITH DISTINCT n WHERE {cond} RETURN n.name")
        }
        (_, ReturnSpec::Aggregate { func: AggFn::Count, .. }) => format!("{head} WITH DISTINCT n RETURN count(n)"),
        (_, ReturnSpec::Aggregate { func, prop }) => format!(
            "{head} WITH DISTINCT n RETURN {}(n.{})",
            func.as_str(),
            p(prop.as_ref().unwrap_or(&String::new()))
        ),
    }
}

/// Values of `prop` over the distinct answer nodes of `m` on the full graph.
fn observed(m: &MatchInstance, g: &PropertyGraph, prop: &str, budget: &Budget) -> Result<Vec<Cell>, &'static str> {
    let q = format!("{} WITH DISTINCT n RETURN n.{}", m.render(true), ident(prop));
    let parsed = parse_query(&q).map_err(|_| "internal-parse")?;
    let t: ResultTable = execute(&parsed, g, budget).map_err(exec_reason)?;
    Ok(t.rows.into_iter().map(|mut r| r.swap_remove(0)).collect())
}

pub fn exec_reason(e: ExecError) -> &'static str {
    match e {
        ExecError::Timeout => "timeout",
        ExecError::RowLimit { .. } | ExecError::IntermediateLimit { .. } => "too-many-rows",
        _ => "runtime-error",
    }
}

fn to_filter_value(c: &Cell) -> Option<FilterValue> {
    Some(match c {
        Cell::Text(s) => FilterValue::Text(s.clone()),
        Cell::Int(i) => FilterValue::Int(*i),
        Cell::Float(x) if x.is_finite() => FilterValue::Float(*x),
        Cell::Date(d) => FilterValue::Date(*d),
        _ => return None,
    })
}

fn perturb<R: Rng>(v: FilterValue, rng: &mut R) -> FilterValue {
    let k = 1.0 + rng.gen_range(-0.1..=0.1);
    match v {
        FilterValue::Int(i) => FilterValue::Int(libm::round(i as f64 * k) as i64),
        FilterValue::Float(x) => {
            let y = x * k;
            let r = libm::round(y * 100.0) / 100.0;
            FilterValue::Float(if r == 0.0 { y } else { r })
        }
        other => other,
    }
}

/// Picks and parameterizes a RETURN template for `m`.
pub fn instantiate_return<R: Rng>(
    template: ReturnTemplateId,
    m: &MatchInstance,
    g: &PropertyGraph,
    budget: &Budget,
    rng: &mut R,
) -> Result<ReturnSpec, &'static str> {
    if m.pattern.is_special() {
        return if template == ReturnTemplateId::Special {
            Ok(ReturnSpec::Special)
        } else {
            Err("template-not-applicable")
        };
    }
    let named_answer = m.pattern == PatternId::Basic2;
    if named_answer && template != ReturnTemplateId::Property {
        return Err("template-not-applicable");
    }
    let props = props_of(g, &m.nodes[0].label);
    let pick = |pred: &dyn Fn(Datatype) -> bool, rng: &mut R| -> Option<(String, Datatype)> {
        let c: Vec<&(String, Datatype)> = props.iter().filter(|(_, d)| pred(*d)).collect();
        c.choose(rng).map(|x| (*x).clone())
    };
    let non_null = |vals: &[Cell]| vals.iter().filter(|c| !c.is_null()).count();
    match template {
        ReturnTemplateId::Name => Ok(ReturnSpec::Name),
        ReturnTemplateId::Property if named_answer => {
            let (prop, _) = pick(&|_| true, rng).ok_or("no-property")?;
            if non_null(&observed(m, g, &prop, budget)?) == 0 {
                return Err("null-property");
            }
            Ok(ReturnSpec::Property { prop })
        }
        ReturnTemplateId::Property => {
            let (prop, _) = pick(&|d| d == Datatype::ListStr, rng).ok_or("no-property")?;
            let vals = observed(m, g, &prop, budget)?;
            if !vals.iter().any(|c| matches!(c, Cell::List(l) if !l.is_empty())) {
                return Err("null-property");
            }
            Ok(ReturnSpec::PropertyList { prop })
        }
        ReturnTemplateId::Sort => {
            let (prop, _) = pick(&Datatype::is_orderable, rng).ok_or("no-property")?;
            if non_null(&observed(m, g, &prop, budget)?) < 2 {
                return Err("too-few-values");
            }
            Ok(ReturnSpec::Sort {
                prop,
                ascending: rng.gen_bool(0.5),
            })
        }
        ReturnTemplateId::Argmax => {
            let (prop, _) = pick(&Datatype::is_orderable, rng).ok_or("no-property")?;
            let vals = observed(m, g, &prop, budget)?;
            let mut sorted: Vec<Cell> = vals.into_iter().filter(|c| !c.is_null()).collect();
            if sorted.len() < 2 {
                return Err("too-few-values");
            }
            let descending = rng.gen_bool(0.5);
            sorted.sort_by(cell_order);
            if descending {
                sorted.reverse();
            }
            if cell_order(&sorted[0], &sorted[1]) == Ordering::Equal {
                return Err("tied-extreme");
            }
            Ok(ReturnSpec::Argmax { prop, descending })
        }
        ReturnTemplateId::Filter => {
            let (prop, d) = pick(&|_| true, rng).ok_or("no-property")?;
            let vals = observed(m, g, &prop, budget)?;
            let op = *FilterOp::for_datatype(d).choose(rng).ok_or("no-operator")?;
            let pool: Vec<&Cell> = match d {
                Datatype::ListStr => vals
                    .iter()
                    .filter_map(|c| match c {
                        Cell::List(items) => Some(items.iter()),
                        _ => None,
                    })
                    .flatten()
                    .collect(),
                _ => vals.iter().filter(|c| !c.is_null()).collect(),
            };
            let v = pool.choose(rng).and_then(|c| to_filter_value(c)).ok_or("null-property")?;
            let value = if op.is_ordering() { perturb(v, rng) } else { v };
            Ok(ReturnSpec::Filter { prop, op, value })
        }
        ReturnTemplateId::Aggregate => {
            let mut options: Vec<(AggFn, Option<(String, Datatype)>)> = alloc::vec![(AggFn::Count, None)];
            for (p, d) in &props {
                for f in [AggFn::Min, AggFn::Max, AggFn::Avg, AggFn::Sum] {
                    if f.accepts(*d) {
                        options.push((f, Some((p.clone(), *d))));
                    }
                }
            }
            let (func, prop) = options.choose(rng).cloned().ok_or("no-property")?;
            if let Some((p, _)) = &prop {
                if non_null(&observed(m, g, p, budget)?) == 0 {
                    return Err("null-property");
                }
            }
            Ok(ReturnSpec::Aggregate {
                func,
                prop: prop.map(|(p, _)| p),
            })
        }
        ReturnTemplateId::Special => Err("template-not-applicable"),
    }
}
