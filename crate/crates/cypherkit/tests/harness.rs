mod support;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use cypherkit::harness::{evaluate_predictions, EvalOutcome, HarnessOptions};
use cypherkit::jsonl::read_jsonl;
use cypherkit_core::metrics::{aggregate_report, InstanceResult, ERR_MISSING, ERR_RUNTIME, ERR_SYNTAX, ERR_TIMEOUT};
use cypherkit_core::synthetic::film_world;
use cypherkit_core::task::{PatternId, Prediction, ReturnTemplateId, TaskInstance};
use cypherkit_core::cypher::{execute, parse_query, ResultTable};
use cypherkit_core::{Budget, PropertyGraph};
use support::{fixture, load_graph};

// Filtered inside enumeration, so it never trips the intermediate-row guard.
const CARTESIAN: &str = "MATCH (a), (b), (c) WHERE a.name = b.name + c.name RETURN count(*)";

fn corpus_graphs() -> BTreeMap<String, PropertyGraph> {
    ["company", "nba", "biology", "geography", "politics"]
        .iter()
        .map(|n| (n.to_string(), load_graph(&format!("corpus/{n}.json"))))
        .collect()
}

fn tasks() -> Vec<TaskInstance> {
    read_jsonl(&fixture("eval/tasks.jsonl")).unwrap()
}

fn preds(file: &str) -> Vec<Prediction> {
    read_jsonl(&fixture(file)).unwrap()
}

fn run(tasks: &[TaskInstance], preds: &[Prediction], graphs: &BTreeMap<String, PropertyGraph>) -> EvalOutcome {
    evaluate_predictions(tasks, preds, graphs, &HarnessOptions::default(), &AtomicBool::new(false))
}

fn result<'a>(out: &'a EvalOutcome, qid: &str) -> &'a InstanceResult {
    out.report.instances.iter().find(|r| r.qid == qid).unwrap()
}

#[test]
fn gold_predictions_score_full_marks() {
    let out = run(&tasks(), &preds("eval/gold_predictions.jsonl"), &corpus_graphs());
    assert!(!out.interrupted);
    assert_eq!(out.report.instances.len(), 10);
    assert_eq!(out.report.summary_line(), "EX 100.00 PSJS 100.00 Exec 100.00");
    assert!(out.report.instances.iter().all(|r| r.error.is_none() && r.latency_ms >= 0.0));
}

#[test]
fn mixed_predictions() {
    let out = run(&tasks(), &preds("eval/predictions.jsonl"), &corpus_graphs());
    assert_eq!(out.report.summary_line(), "EX 60.00 PSJS 80.00 Exec 80.00");
    assert_eq!(result(&out, "mixed-q11").error.as_deref(), Some(ERR_SYNTAX));
    assert_eq!(result(&out, "mixed-q17").error.as_deref(), Some(ERR_RUNTIME));
    for qid in ["mixed-q15", "mixed-q18"] {
        let r = result(&out, qid);
        assert_eq!((r.executable, r.ex, r.psjs), (true, 0, 1.0), "{qid}");
    }
    let agg = &out.report.aggregates;
    assert_eq!(agg.overall.count, 10);
    let company = &agg.by_graph["company"];
    assert_eq!((company.count, company.ex, company.exec), (3, 1.0 / 3.0, 1.0 / 3.0));
    let sort = &agg.by_return_template[ReturnTemplateId::Sort.as_str()];
    assert_eq!((sort.count, sort.ex, sort.psjs), (1, 0.0, 1.0));
    let basic4 = &agg.by_pattern[PatternId::Basic4.as_str()];
    assert_eq!(basic4.count, 4);
    assert!((basic4.ex - 0.25).abs() < 1e-12 && (basic4.psjs - 0.75).abs() < 1e-12);
}

#[test]
fn aggregates_are_instance_weighted_means() {
    let out = run(&tasks(), &preds("eval/predictions.jsonl"), &corpus_graphs());
    let inst = &out.report.instances;
    assert_eq!(aggregate_report(inst), out.report.aggregates);
    let mut by_graph: BTreeMap<&str, (usize, f64, f64, f64)> = BTreeMap::new();
    for r in inst {
        let e = by_graph.entry(&r.graph).or_default();
        e.0 += 1;
        e.1 += r.ex as f64;
        e.2 += r.psjs;
        e.3 += r.executable as u8 as f64;
    }
    for (g, (n, ex, psjs, exec)) in by_graph {
        let a = &out.report.aggregates.by_graph[g];
        let n = n as f64;
        assert_eq!(a.count as f64, n);
        assert!((a.ex - ex / n).abs() < 1e-12 && (a.psjs - psjs / n).abs() < 1e-12 && (a.exec - exec / n).abs() < 1e-12);
    }
}

#[test]
fn no_predictions_means_nothing_executes() {
    let out = run(&tasks(), &[], &corpus_graphs());
    assert_eq!(out.report.summary_line(), "EX 0.00 PSJS 0.00 Exec 0.00");
    assert!(out.report.instances.iter().all(|r| r.error.as_deref() == Some(ERR_MISSING)));
}

#[test]
fn unknown_qids_are_listed_not_scored() {
    let mut p = preds("eval/gold_predictions.jsonl");
    p.push(Prediction {
        qid: "nobody-asked".into(),
        cypher: "RETURN 1".into(),
    });
    p.push(Prediction {
        qid: "nobody-asked".into(),
        cypher: "RETURN 2".into(),
    });
    let out = run(&tasks(), &p, &corpus_graphs());
    assert_eq!(out.report.unknown_qids, vec!["nobody-asked".to_string()]);
    assert_eq!(out.report.instances.len(), 10);
}

#[test]
fn missing_graph_is_a_runtime_error() {
    let mut g = corpus_graphs();
    g.remove("nba");
    let out = run(&tasks(), &preds("eval/gold_predictions.jsonl"), &g);
    let r = result(&out, "mixed-q6");
    assert_eq!(r.error.as_deref(), Some(ERR_RUNTIME));
    assert!(!r.executable);
}

fn cartesian_task(g: &PropertyGraph) -> TaskInstance {
    let gold = "MATCH (n:Movie) RETURN n.name";
    let q = parse_query(gold).unwrap();
    let answer: ResultTable = execute(&q, g, &Budget::unlimited()).unwrap();
    TaskInstance {
        qid: "slow".into(),
        graph: g.name().into(),
        question: "Which movies are there?".into(),
        question_template: "Which movies are there?".into(),
        cypher: gold.into(),
        pattern: PatternId::Basic1,
        return_template: ReturnTemplateId::Name,
        answer,
        provenance_size: Default::default(),
        flags: vec![],
    }
}

#[test]
fn pathological_prediction_times_out() {
    let g = film_world(1, 200);
    let task = cartesian_task(&g);
    let graphs = BTreeMap::from([(g.name().to_string(), g)]);
    let opts = HarnessOptions {
        workers: 2,
        timeout: Duration::from_millis(300),
    };
    let p = vec![Prediction {
        qid: "slow".into(),
        cypher: CARTESIAN.into(),
    }];
    let start = Instant::now();
    let out = evaluate_predictions(&[task], &p, &graphs, &opts, &AtomicBool::new(false));
    assert!(start.elapsed() < Duration::from_secs(10), "{:?}", start.elapsed());
    let r = &out.report.instances[0];
    assert_eq!(r.error.as_deref(), Some(ERR_TIMEOUT));
    assert_eq!((r.executable, r.ex, r.psjs), (false, 0, 0.0));
}

#[test]
fn cancel_stops_in_flight_work() {
    let g = film_world(1, 200);
    let task = cartesian_task(&g);
    let graphs = BTreeMap::from([(g.name().to_string(), g)]);
    let opts = HarnessOptions {
        workers: 1,
        timeout: Duration::from_secs(600),
    };
    let p = vec![Prediction {
        qid: "slow".into(),
        cypher: CARTESIAN.into(),
    }];
    let cancel = AtomicBool::new(false);
    let start = Instant::now();
    let out = std::thread::scope(|s| {
        s.spawn(|| {
            std::thread::sleep(Duration::from_millis(200));
            cancel.store(true, Ordering::SeqCst);
        });
        evaluate_predictions(&[task.clone(), task], &p, &graphs, &opts, &cancel)
    });
    assert!(start.elapsed() < Duration::from_secs(10));
    assert!(out.interrupted);
    assert!(out.report.instances.is_empty());
}
