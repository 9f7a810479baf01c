//! Execution Accuracy (EX), Provenance Subgraph Jaccard Similarity (PSJS) and
//! the per-instance / aggregate evaluation records built on them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::cypher::{
    execute, extract_match_prefix, parse_query, provenance, serialize_cell, Cell, ExecError, GraphElement, Query,
    ResultTable,
};
use crate::graph::PropertyGraph;
use crate::task::TaskInstance;

pub const NUMERIC_TOLERANCE: f64 = 1e-6;

/// Cell equality used by EX: numbers within [`NUMERIC_TOLERANCE`], everything
/// else through the canonical serialization.
pub fn cells_equal(a: &Cell, b: &Cell) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y || (x - y).abs() <= NUMERIC_TOLERANCE,
        _ => serialize_cell(a) == serialize_cell(b),
    }
}

#[derive(Debug, Clone, PartialEq, PartialOrd)]
enum SortKey {
    Number(f64),
    Text(String),
}

fn sort_key(c: &Cell) -> SortKey {
    match c.as_f64() {
        Some(x) if !x.is_nan() => SortKey::Number(x),
        _ => SortKey::Text(serialize_cell(c)),
    }
}

fn cmp_keys(a: &[SortKey], b: &[SortKey]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x, y) {
            (SortKey::Number(p), SortKey::Number(q)) => p.partial_cmp(q).unwrap_or(Ordering::Equal),
            (SortKey::Number(_), SortKey::Text(_)) => Ordering::Less,
            (SortKey::Text(_), SortKey::Number(_)) => Ordering::Greater,
            (SortKey::Text(p), SortKey::Text(q)) => p.cmp(q),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn sorted_rows<'a>(rows: impl Iterator<Item = Vec<&'a Cell>>) -> Vec<Vec<&'a Cell>> {
    let mut keyed: Vec<(Vec<SortKey>, Vec<&Cell>)> = rows
        .map(|r| (r.iter().map(|c| sort_key(c)).collect(), r))
        .collect();
    keyed.sort_by(|a, b| cmp_keys(&a.0, &b.0));
    keyed.into_iter().map(|(_, r)| r).collect()
}

fn column_sorted(t: &ResultTable, i: usize) -> Vec<Vec<&Cell>> {
    sorted_rows(t.rows.iter().map(|r| alloc::vec![&r[i]]))
}

fn rows_match(a: &[Vec<&Cell>], b: &[Vec<&Cell>]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.iter().zip(y).all(|(p, q)| cells_equal(p, q)))
}

/// 1 iff some column permutation of `pred` makes its row multiset equal to `gold`'s.
pub fn execution_accuracy(gold: &ResultTable, pred: &ResultTable) -> bool {
    let k = gold.columns.len();
    if k != pred.columns.len() || gold.rows.len() != pred.rows.len() {
        return false;
    }
    if gold.rows.iter().chain(&pred.rows).any(|r| r.len() != k) {
        return false;
    }
    let gold_sorted = sorted_rows(gold.rows.iter().map(|r| r.iter().collect()));
    if k == 0 {
        return true;
    }

    // Column value multisets prune the permutation search.
    let gold_cols: Vec<_> = (0..k).map(|i| column_sorted(gold, i)).collect();
    let pred_cols: Vec<_> = (0..k).map(|j| column_sorted(pred, j)).collect();
    let candidates: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).filter(|&j| rows_match(&gold_cols[i], &pred_cols[j])).collect())
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return false;
    }

    let mut assignment = alloc::vec![usize::MAX; k];
    let mut used = alloc::vec![false; k];
    search(0, &candidates, &mut assignment, &mut used, &mut |perm| {
        let permuted = sorted_rows(pred.rows.iter().map(|r| perm.iter().map(|&j| &r[j]).collect()));
        rows_match(&gold_sorted, &permuted)
    })
}

fn search(
    i: usize,
    candidates: &[Vec<usize>],
    assignment: &mut Vec<usize>,
    used: &mut Vec<bool>,
    check: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if i == candidates.len() {
        return check(assignment);
    }
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        used[j] = true;
        assignment[i] = j;
        let found = search(i + 1, candidates, assignment, used, check);
        used[j] = false;
        if found {
            return true;
        }
    }
    false
}

/// Jaccard similarity; two empty sets are identical and score 1.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsjsOutcome {
    pub score: f64,
    pub timed_out: bool,
}

/// Provenance set of a query's MATCH prefix.
pub fn query_provenance(q: &Query, g: &PropertyGraph, budget: &Budget) -> Result<BTreeSet<GraphElement>, PrefixFailure> {
    let prefix = extract_match_prefix(q).map_err(|_| PrefixFailure::EmptyPrefix)?;
    provenance(&prefix, g, budget).map_err(PrefixFailure::Exec)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixFailure {
    EmptyPrefix,
    Exec(ExecError),
}

pub fn provenance_psjs(gold: &Query, pred: &Query, g: &PropertyGraph, budget: &Budget) -> PsjsOutcome {
    let timed_out = |e: &PrefixFailure| matches!(e, PrefixFailure::Exec(ExecError::Timeout));
    let gold_set = match query_provenance(gold, g, budget) {
        Ok(s) => s,
        Err(e) => {
            return PsjsOutcome {
                score: 0.0,
                timed_out: timed_out(&e),
            }
        }
    };
    match query_provenance(pred, g, budget) {
        Ok(p) => PsjsOutcome {
            score: jaccard(&gold_set, &p),
            timed_out: false,
        },
        Err(e) => PsjsOutcome {
            score: 0.0,
            timed_out: timed_out(&e),
        },
    }
}

pub const ERR_SYNTAX: &str = "syntax error";
pub const ERR_TIMEOUT: &str = "timeout";
pub const ERR_RUNTIME: &str = "runtime error";
pub const ERR_MISSING: &str = "missing prediction";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub qid: String,
    pub graph: String,
    pub pattern: String,
    pub return_template: String,
    pub executable: bool,
    pub ex: u8,
    pub psjs: f64,
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub psjs_timeout: bool,
}

fn exec_error_category(e: &ExecError) -> &'static str {
    match e {
        ExecError::Timeout => ERR_TIMEOUT,
        _ => ERR_RUNTIME,
    }
}

/// Scores one prediction against its task. `latency_ms` is left at 0 for the
/// caller to fill in.
pub fn evaluate_instance(task: &TaskInstance, pred: Option<&str>, g: &PropertyGraph, budget: &Budget) -> InstanceResult {
    let mut r = InstanceResult {
        qid: task.qid.clone(),
        graph: task.graph.clone(),
        pattern: task.pattern.as_str().into(),
        return_template: task.return_template.as_str().into(),
        executable: false,
        ex: 0,
        psjs: 0.0,
        latency_ms: 0.0,
        error: None,
        message: None,
        psjs_timeout: false,
    };
    let Some(text) = pred else {
        r.error = Some(ERR_MISSING.into());
        return r;
    };
    let pred_q = match parse_query(text) {
        Ok(q) => q,
        Err(e) => {
            r.error = Some(ERR_SYNTAX.into());
            r.message = Some(e.to_string());
            return r;
        }
    };
    let table = match execute(&pred_q, g, budget) {
        Ok(t) => t,
        Err(e) => {
            r.error = Some(exec_error_category(&e).into());
            r.message = Some(e.to_string());
            return r;
        }
    };
    r.executable = true;
    r.ex = execution_accuracy(&task.answer, &table) as u8;
    match parse_query(&task.cypher) {
        Ok(gold_q) => {
            let o = provenance_psjs(&gold_q, &pred_q, g, budget);
            r.psjs = o.score;
            r.psjs_timeout = o.timed_out;
        }
        Err(e) => r.message = Some(alloc::format!("gold query does not parse: {e}")),
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub ex: f64,
    pub psjs: f64,
    pub exec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub overall: Aggregate,
    pub by_pattern: BTreeMap<String, Aggregate>,
    pub by_return_template: BTreeMap<String, Aggregate>,
    pub by_graph: BTreeMap<String, Aggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub instances: Vec<InstanceResult>,
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown_qids: Vec<String>,
}

#[derive(Default)]
struct Sums {
    count: usize,
    ex: f64,
    psjs: f64,
    exec: f64,
}

impl Sums {
    fn add(&mut self, r: &InstanceResult) {
        self.count += 1;
        self.ex += r.ex as f64;
        self.psjs += r.psjs;
        self.exec += r.executable as u8 as f64;
    }

    fn mean(&self) -> Aggregate {
        let n = self.count.max(1) as f64;
        Aggregate {
            count: self.count,
            ex: self.ex / n,
            psjs: self.psjs / n,
            exec: self.exec / n,
        }
    }
}

/// Instance-weighted means overall and per group; empty groups never appear.
pub fn aggregate_report(results: &[InstanceResult]) -> Aggregates {
    let mut overall = Sums::default();
    let mut groups: [BTreeMap<String, Sums>; 3] = Default::default();
    for r in results {
        overall.add(r);
        for (map, key) in groups.iter_mut().zip([&r.pattern, &r.return_template, &r.graph]) {
            map.entry(key.clone()).or_default().add(r);
        }
    }
    let [p, t, g] = groups.map(|m| m.into_iter().map(|(k, s)| (k, s.mean())).collect());
    Aggregates {
        overall: overall.mean(),
        by_pattern: p,
        by_return_template: t,
        by_graph: g,
    }
}

impl EvalReport {
    /// Sorts instances by qid and computes the aggregates.
    pub fn assemble(mut instances: Vec<InstanceResult>, mut unknown_qids: Vec<String>) -> Self {
        instances.sort_by(|a, b| a.qid.cmp(&b.qid));
        unknown_qids.sort();
        unknown_qids.dedup();
        EvalReport {
            aggregates: aggregate_report(&instances),
            instances,
            unknown_qids,
        }
    }

    /// `EX 60.00 PSJS 80.00 Exec 80.00`
    pub fn summary_line(&self) -> String {
        let o = &self.aggregates.overall;
        alloc::format!("EX {:.2} PSJS {:.2} Exec {:.2}", o.ex * 100.0, o.psjs * 100.0, o.exec * 100.0)
    }
}
