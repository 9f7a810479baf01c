//! Quota-driven generation of benchmark tasks for one graph.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instantiate::{exec_reason, gold_cypher, instantiate_match, instantiate_return, Catalog, Reasons, ReturnSpec};
use super::pattern::{CmpOp, MatchInstance};
use super::sample::sample_subgraph;
use super::text::{fill, TemplateSet};
use crate::budget::{Budget, Deadline};
use crate::cypher::{execute, parse_query, Cell};
use crate::graph::PropertyGraph;
use crate::metrics::query_provenance;
use crate::task::{PatternId, ReturnTemplateId, TaskInstance};

pub const DEFAULT_SAMPLE_CAP: usize = 10_000;
pub const DEFAULT_DRAWS: usize = 200;
pub const DEFAULT_MAX_ROWS: usize = 100_000;

/// Requested task counts per (pattern, return template) cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quotas(pub BTreeMap<PatternId, BTreeMap<ReturnTemplateId, usize>>);

/// RETURN templates that can be combined with a pattern.
pub fn applicable_templates(p: PatternId) -> &'static [ReturnTemplateId] {
    if p.is_special() {
        &[ReturnTemplateId::Special]
    } else if p == PatternId::Basic2 {
        &[ReturnTemplateId::Property]
    } else {
        &ReturnTemplateId::BASIC
    }
}

impl Quotas {
    /// `n` tasks for every applicable cell.
    pub fn uniform(n: usize) -> Self {
        let mut q = BTreeMap::new();
        for p in PatternId::ALL {
            q.insert(p, applicable_templates(p).iter().map(|t| (*t, n)).collect());
        }
        Quotas(q)
    }

    /// `n` tasks per pattern, spread over its applicable templates.
    pub fn per_pattern(n: usize) -> Self {
        let mut q = BTreeMap::new();
        for p in PatternId::ALL {
            let ts = applicable_templates(p);
            let cells = ts
                .iter()
                .enumerate()
                .map(|(i, t)| (*t, n / ts.len() + usize::from(i < n % ts.len())))
                .collect();
            q.insert(p, cells);
        }
        Quotas(q)
    }

    pub fn get(&self, p: PatternId, t: ReturnTemplateId) -> usize {
        self.0.get(&p).and_then(|m| m.get(&t)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().flat_map(|m| m.values()).sum()
    }
}

pub type DeadlineFactory = dyn Fn() -> Box<dyn Deadline>;

pub struct GenerateOptions<'a> {
    pub seed: u64,
    pub sample_cap: usize,
    pub draws: usize,
    pub max_rows: usize,
    /// Starts the clock for one query execution.
    pub deadline: &'a DeadlineFactory,
    pub templates: &'a TemplateSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub pattern: PatternId,
    pub return_template: ReturnTemplateId,
    pub requested: usize,
    pub achieved: usize,
    pub rejections: Reasons,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub graph: String,
    pub sample_entities: usize,
    pub cells: Vec<CellReport>,
}

impl GenerationReport {
    pub fn shortfalls(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| c.achieved < c.requested)
    }
}

fn bump(reasons: &mut Reasons, key: &str) {
    *reasons.entry(key.into()).or_default() += 1;
}

/// Template question for an instantiated task.
pub fn question_text(templates: &TemplateSet, m: &MatchInstance, r: &ReturnSpec) -> Result<String, super::text::TemplateError> {
    let mut owned: BTreeMap<String, String> = BTreeMap::new();
    for n in &m.nodes {
        owned.insert(format!("{}_LABEL", n.var), n.label.clone());
        if let Some(name) = &n.name {
            owned.insert(format!("{}_name", n.var), name.clone());
        }
    }
    for e in &m.edges {
        owned.insert(format!("{}_LABEL", e.var), e.label.clone());
    }
    if let Some(y) = m.year {
        owned.insert("year".into(), y.to_string());
    }
    if let Some((prop, op)) = &m.compare {
        owned.insert("prop".into(), prop.clone());
        owned.insert("cmp".into(), (if *op == CmpOp::Gt { "greater" } else { "smaller" }).into());
    }
    let vars: BTreeMap<&str, String> = owned.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    let head = fill(templates.match_text(m.pattern.as_str(), &m.variant)?, &vars)?;
    let mut rvars: BTreeMap<&str, String> = BTreeMap::new();
    r.text_vars(&mut rvars);
    rvars.insert("MATCH", head);
    fill(templates.return_text(r.text_key())?, &rvars)
}

/// Generates tasks for `g` under `quotas`. Every returned task has been
/// executed on the full graph; its answer is non-empty and holds only
/// literal values.
pub fn generate(g: &PropertyGraph, quotas: &Quotas, opts: &GenerateOptions) -> (Vec<TaskInstance>, GenerationReport) {
    let sample = sample_subgraph(g, opts.sample_cap, opts.seed);
    let mut catalog = Catalog::new(g, &sample);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut tasks = Vec::new();
    let mut report = GenerationReport {
        graph: g.name().into(),
        sample_entities: sample.entity_count(),
        cells: Vec::new(),
    };
    for (pi, p) in PatternId::ALL.into_iter().enumerate() {
        let all_templates = ReturnTemplateId::BASIC.into_iter().chain([ReturnTemplateId::Special]);
        for (ti, t) in all_templates.enumerate() {
            let requested = quotas.get(p, t);
            if requested == 0 {
                continue;
            }
            let mut cell = CellReport {
                pattern: p,
                return_template: t,
                requested,
                achieved: 0,
                rejections: Reasons::new(),
            };
            if !applicable_templates(p).contains(&t) {
                bump(&mut cell.rejections, "template-not-applicable");
                report.cells.push(cell);
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream((pi * 8 + ti) as u64);
            let mut attempts = requested * 10 + 50;
            while cell.achieved < requested && attempts > 0 {
                attempts -= 1;
                let deadline = (opts.deadline)();
                let budget = Budget::new(&*deadline);
                let Some(m) = instantiate_match(&mut catalog, p, opts.draws, &budget, &mut rng, &mut cell.rejections) else {
                    break;
                };
                let deadline = (opts.deadline)();
                let budget = Budget::new(&*deadline);
                let r = match instantiate_return(t, &m, g, &budget, &mut rng) {
                    Ok(r) => r,
                    Err(why) => {
                        bump(&mut cell.rejections, why);
                        continue;
                    }
                };
                let cypher = gold_cypher(&m, &r);
                if seen.contains(&cypher) {
                    bump(&mut cell.rejections, "duplicate");
                    continue;
                }
                match verify(g, &cypher, &m, opts) {
                    Ok((answer, provenance_size)) => {
                        let question = match question_text(opts.templates, &m, &r) {
                            Ok(q) => q,
                            Err(_) => {
                                bump(&mut cell.rejections, "missing-question-template");
                                break;
                            }
                        };
                        seen.insert(cypher.clone());
                        tasks.push(TaskInstance {
                            qid: format!("{}-{}-{}-{:04}", g.name(), p.as_str(), t.as_str(), cell.achieved),
                            graph: g.name().into(),
                            question: question.clone(),
                            question_template: question,
                            cypher,
                            pattern: p,
                            return_template: t,
                            answer,
                            provenance_size,
                            flags: Vec::new(),
                        });
                        cell.achieved += 1;
                    }
                    Err(why) => bump(&mut cell.rejections, why),
                }
            }
            report.cells.push(cell);
        }
    }
    tasks.sort_by(|a, b| a.qid.cmp(&b.qid));
    (tasks, report)
}

fn verify(
    g: &PropertyGraph,
    cypher: &str,
    m: &MatchInstance,
    opts: &GenerateOptions,
) -> Result<(crate::cypher::ResultTable, usize), &'static str> {
    let q = parse_query(cypher).map_err(|_| "gold-parse-error")?;
    let deadline = (opts.deadline)();
    let budget = Budget::new(&*deadline).with_max_rows(opts.max_rows);
    let answer = execute(&q, g, &budget).map_err(exec_reason)?;
    if answer.is_empty() {
        return Err("empty-answer");
    }
    if answer.rows.iter().flatten().any(Cell::is_object) {
        return Err("non-literal-answer");
    }
    if answer.rows.iter().all(|r| r.iter().all(Cell::is_null)) {
        return Err("null-answer");
    }
    if m.pattern == PatternId::OptionalMatch && !answer.rows.iter().any(|r| matches!(r[1], Cell::Int(k) if k > 0)) {
        return Err("all-zero-counts");
    }
    let deadline = (opts.deadline)();
    let size = query_provenance(&q, g, &Budget::new(&*deadline)).map(|s| s.len()).unwrap_or(0);
    Ok((answer, size))
}
