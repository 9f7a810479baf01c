//! Parallel evaluation of predictions with per-instance time limits.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use cypherkit_core::metrics::{evaluate_instance, EvalReport, InstanceResult, ERR_RUNTIME};
use cypherkit_core::task::{Prediction, TaskInstance};
use cypherkit_core::{Budget, PropertyGraph};

pub const DEFAULT_WORKERS: usize = 8;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone)]
pub struct HarnessOptions {
    pub workers: usize,
    /// Wall-clock limit for one instance: prediction execution plus provenance.
    pub timeout: Duration,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            workers: DEFAULT_WORKERS,
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

#[derive(Debug)]
pub struct EvalOutcome {
    pub report: EvalReport,
    /// Set when `cancel` fired; the report then covers only finished instances.
    pub interrupted: bool,
}

fn missing_graph(task: &TaskInstance) -> InstanceResult {
    InstanceResult {
        qid: task.qid.clone(),
        graph: task.graph.clone(),
        pattern: task.pattern.as_str().into(),
        return_template: task.return_template.as_str().into(),
        executable: false,
        ex: 0,
        psjs: 0.0,
        latency_ms: 0.0,
        error: Some(ERR_RUNTIME.into()),
        message: Some(format!("graph `{}` is not loaded", task.graph)),
        psjs_timeout: false,
    }
}

/// Scores every task with a pool of `opts.workers` threads sharing the
/// immutable graphs. Setting `cancel` stops the pool; instances in flight at
/// that moment are dropped rather than recorded as timeouts.
pub fn evaluate_predictions(
    tasks: &[TaskInstance],
    preds: &[Prediction],
    graphs: &BTreeMap<String, PropertyGraph>,
    opts: &HarnessOptions,
    cancel: &AtomicBool,
) -> EvalOutcome {
    let task_qids: BTreeSet<&str> = tasks.iter().map(|t| t.qid.as_str()).collect();
    let mut by_qid: BTreeMap<&str, &str> = BTreeMap::new();
    let mut unknown = Vec::new();
    for p in preds {
        if !task_qids.contains(p.qid.as_str()) {
            unknown.push(p.qid.clone());
        } else if by_qid.insert(&p.qid, &p.cypher).is_some() {
            log::warn!("duplicate prediction for {}; using the last one", p.qid);
        }
    }

    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(tasks.len()));
    let progress_every = (tasks.len() / 20).max(1);
    std::thread::scope(|s| {
        for _ in 0..opts.workers.max(1) {
            s.spawn(|| loop {
                if cancel.load(Ordering::Relaxed) {
                    return;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else {
                    return;
                };
                let r = match graphs.get(&task.graph) {
                    None => missing_graph(task),
                    Some(g) => {
                        let start = Instant::now();
                        let end = start + opts.timeout;
                        let deadline = || cancel.load(Ordering::Relaxed) || Instant::now() >= end;
                        let budget = Budget::new(&deadline);
                        let mut r = evaluate_instance(
                            task,
                            by_qid.get(task.qid.as_str()).copied(),
                            g,
                            &budget,
                        );
                        if cancel.load(Ordering::Relaxed) {
                            return;
                        }
                        r.latency_ms = start.elapsed().as_secs_f64() * 1e3;
                        r
                    }
                };
                results.lock().unwrap().push(r);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n.is_multiple_of(progress_every) || n == tasks.len() {
                    log::info!("evaluated {n}/{}", tasks.len());
                }
            });
        }
    });

    let results = results.into_inner().unwrap();
    EvalOutcome {
        report: EvalReport::assemble(results, unknown),
        interrupted: cancel.load(Ordering::Relaxed),
    }
}
