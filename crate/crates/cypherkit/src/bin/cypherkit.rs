use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{CommandFactory, Parser, Subcommand};
use cypherkit::file_source::FileSource;
use cypherkit::graph_io::{decode_graph_lenient, read_graph_file, write_graph, GraphStats};
use cypherkit::harness::{evaluate_predictions, HarnessOptions};
use cypherkit::jsonl::{read_jsonl, to_jsonl, write_output};
use cypherkit::rewriter_http::HttpRewriter;
use cypherkit::sparql::{SparqlConfig, SparqlSource};
use cypherkit::{load_mapping_config, load_unit_table, SourceSpec};
use cypherkit_core::generator::rewrite::DEFAULT_REWRITE_PROMPT;
use cypherkit_core::generator::{generate, rewrite_question, GenerateOptions, Quotas, TemplateSet};
use cypherkit_core::rdf::{build_graph, MappingConfig, StatementSource, TransformStats, UnitTable};
use cypherkit_core::schema_doc::derive_schema;
use cypherkit_core::task::{Prediction, TaskInstance};
use cypherkit_core::{Deadline, PropertyGraph};

static CANCEL: AtomicBool = AtomicBool::new(false);

const DEFAULT_SEED: u64 = 42;
const GENERATION_TIMEOUT: Duration = Duration::from_secs(30);
const GENERATION_MAX_ROWS: usize = 100_000;

#[derive(Parser)]
#[command(
    name = "cypherkit",
    version,
    about = "Property-graph construction, text-to-Cypher task generation and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a property graph from RDF statements according to a mapping config.
    Transform(TransformArgs),
    /// Generate question/Cypher/answer tasks from a graph.
    Generate(GenerateArgs),
    /// Score predicted Cypher queries against gold tasks.
    Eval(EvalArgs),
    /// Print the schema observed in a graph file as prompt-ready JSON.
    Schema(GraphArg),
    /// Print entity, relation, type and property counts of a graph file.
    Stats(GraphArg),
    /// List every schema violation in a graph file.
    Validate(GraphArg),
}

#[derive(clap::Args)]
struct GraphArg {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(clap::Args)]
struct TransformArgs {
    /// Mapping config JSON.
    #[arg(long)]
    mapping: PathBuf,
    /// Unit table JSON; without it no quantity can be converted.
    #[arg(long)]
    units: Option<PathBuf>,
    /// `sparql:<url>` or `file:<path>`; defaults to the SPARQL_ENDPOINT variable.
    #[arg(long)]
    source: Option<SourceSpec>,
    /// Bearer token sent to the SPARQL endpoint.
    #[arg(long, env = "SPARQL_AUTH_TOKEN", hide_env_values = true)]
    auth_token: Option<String>,
    /// SPARQL rows requested per page.
    #[arg(long, default_value_t = 10_000)]
    page_size: usize,
    /// Output graph JSON.
    #[arg(long)]
    graph: PathBuf,
    /// Output transform statistics; defaults to `<graph stem>.stats.json`.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Quota JSON: {pattern: {return_template: count}}. Defaults to 10 per pattern.
    #[arg(long)]
    quotas: Option<PathBuf>,
    /// Output tasks JSONL.
    #[arg(long)]
    tasks: PathBuf,
    /// Output generation report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Reword template questions through the rewriter endpoint.
    #[arg(long)]
    rewrite: bool,
    #[arg(long, env = "REWRITER_ENDPOINT")]
    rewriter_endpoint: Option<String>,
    /// Prompt template with ${cypher} and ${question} placeholders.
    #[arg(long)]
    rewrite_prompt: Option<PathBuf>,
    /// Question-text template JSON replacing the bundled one.
    #[arg(long)]
    question_templates: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Graph JSON files; tasks are matched to graphs by name.
    #[arg(long, required = true, num_args = 1..)]
    graph: Vec<PathBuf>,
    #[arg(long)]
    tasks: PathBuf,
    /// Predictions JSONL: {"qid", "cypher"} per line.
    #[arg(long)]
    predictions: PathBuf,
    /// Output report JSON.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 120)]
    timeout_secs: u64,
    #[arg(long, default_value_t = 8)]
    workers: usize,
}

fn cancelled() -> bool {
    CANCEL.load(Ordering::Relaxed)
}

fn require_file(p: &Path) -> anyhow::Result<()> {
    if !p.exists() {
        bail!("{} does not exist", p.display());
    }
    Ok(())
}

/// Writes an output file, or its `.partial` sibling after Ctrl-C.
fn emit(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let at = write_output(path, bytes, !cancelled())
        .with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", at.display());
    Ok(())
}

fn build<S: StatementSource>(
    cfg: &MappingConfig,
    src: &S,
    units: &UnitTable,
) -> anyhow::Result<(PropertyGraph, TransformStats)> {
    build_graph(cfg, src, units).map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_transform(a: TransformArgs) -> anyhow::Result<()> {
    require_file(&a.mapping)?;
    if let Some(u) = &a.units {
        require_file(u)?;
    }
    let cfg = load_mapping_config(&a.mapping)?;
    let units = match &a.units {
        Some(p) => load_unit_table(p)?,
        None => UnitTable::default(),
    };
    let source = match a.source {
        Some(s) => s,
        None => match std::env::var("SPARQL_ENDPOINT") {
            Ok(url) if !url.is_empty() => SourceSpec::Sparql(url),
            _ => bail!("no statement source: pass --source or set SPARQL_ENDPOINT"),
        },
    };
    let (g, stats) = match source {
        SourceSpec::File(p) => {
            require_file(&p)?;
            build(&cfg, &FileSource::open(&p, &cfg.label_language)?, &units)?
        }
        SourceSpec::Sparql(url) => {
            let mut sc = SparqlConfig::new(url);
            sc.page_size = a.page_size;
            sc.language = cfg.label_language.clone();
            sc.auth_token = a.auth_token;
            build(&cfg, &SparqlSource::new(sc), &units)?
        }
    };
    for (label, c) in &stats.entities {
        log::info!(
            "entity {label}: fetched {} kept {} discarded {:?}",
            c.fetched,
            c.kept,
            c.discarded
        );
    }
    for (label, c) in &stats.relations {
        log::info!(
            "relation {label}: fetched {} kept {} discarded {:?}",
            c.fetched,
            c.kept,
            c.discarded
        );
    }
    emit(&a.graph, write_graph(&g).as_bytes())?;
    let stats_path = a
        .stats
        .unwrap_or_else(|| a.graph.with_extension("stats.json"));
    emit(
        &stats_path,
        format!("{}\n", serde_json::to_string_pretty(&stats)?).as_bytes(),
    )?;
    let s = GraphStats::of(&g);
    println!("{}\n{}", GraphStats::HEADER, s.row());
    Ok(())
}

fn generation_deadline() -> Box<dyn Deadline> {
    let end = Instant::now() + GENERATION_TIMEOUT;
    Box::new(move || cancelled() || Instant::now() >= end)
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<()> {
    let endpoint = match (a.rewrite, a.rewriter_endpoint.as_deref()) {
        (true, None | Some("")) => Cli::command()
            .error(
                clap::error::ErrorKind::MissingRequiredArgument,
                "--rewrite needs --rewriter-endpoint <URL> or REWRITER_ENDPOINT",
            )
            .exit(),
        (true, Some(e)) => Some(e.to_string()),
        (false, _) => None,
    };
    require_file(&a.graph)?;
    for p in [&a.quotas, &a.rewrite_prompt, &a.question_templates]
        .into_iter()
        .flatten()
    {
        require_file(p)?;
    }
    let g = read_graph_file(&a.graph)?;
    let quotas: Quotas = match &a.quotas {
        Some(p) => serde_json::from_slice(&std::fs::read(p)?)
            .with_context(|| format!("malformed quota file {}", p.display()))?,
        None => Quotas::per_pattern(10),
    };
    let templates: TemplateSet = match &a.question_templates {
        Some(p) => serde_json::from_slice(&std::fs::read(p)?)
            .with_context(|| format!("malformed templates {}", p.display()))?,
        None => TemplateSet::default(),
    };
    let opts = GenerateOptions {
        seed: a.seed,
        sample_cap: cypherkit_core::generator::generate::DEFAULT_SAMPLE_CAP,
        draws: cypherkit_core::generator::generate::DEFAULT_DRAWS,
        max_rows: GENERATION_MAX_ROWS,
        deadline: &generation_deadline,
        templates: &templates,
    };
    log::info!(
        "generating {} task(s) from {} ({} entities)",
        quotas.total(),
        g.name(),
        g.entity_count()
    );
    let (mut tasks, report) = generate(&g, &quotas, &opts);
    for c in report.shortfalls() {
        log::warn!(
            "{} / {}: {} of {} requested ({:?})",
            c.pattern.as_str(),
            c.return_template.as_str(),
            c.achieved,
            c.requested,
            c.rejections
        );
    }
    if let Some(endpoint) = endpoint {
        let prompt = match &a.rewrite_prompt {
            Some(p) => std::fs::read_to_string(p)?,
            None => DEFAULT_REWRITE_PROMPT.to_string(),
        };
        let rw = HttpRewriter::new(endpoint, Duration::from_secs(120));
        let n = tasks.len();
        for (i, t) in tasks.iter_mut().enumerate() {
            if cancelled() {
                break;
            }
            rewrite_question(t, &rw, &prompt);
            if (i + 1) % 50 == 0 || i + 1 == n {
                log::info!("rewrote {}/{n}", i + 1);
            }
        }
    }
    emit(&a.tasks, to_jsonl(&tasks).as_bytes())?;
    if let Some(r) = &a.report {
        emit(
            r,
            format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes(),
        )?;
    }
    log::info!("{} task(s) written", tasks.len());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> anyhow::Result<()> {
    for p in a.graph.iter().chain([&a.tasks, &a.predictions]) {
        require_file(p)?;
    }
    let mut graphs: BTreeMap<String, PropertyGraph> = BTreeMap::new();
    for p in &a.graph {
        let g = read_graph_file(p)?;
        let name = g.name().to_string();
        if graphs.insert(name.clone(), g).is_some() {
            bail!("two graph files are named `{name}`");
        }
    }
    let tasks: Vec<TaskInstance> = read_jsonl(&a.tasks)?;
    let preds: Vec<Prediction> = read_jsonl(&a.predictions)?;
    let opts = HarnessOptions {
        workers: a.workers,
        timeout: Duration::from_secs(a.timeout_secs),
    };
    log::info!(
        "evaluating {} task(s) with {} worker(s)",
        tasks.len(),
        opts.workers
    );
    let out = evaluate_predictions(&tasks, &preds, &graphs, &opts, &CANCEL);
    if !out.report.unknown_qids.is_empty() {
        log::warn!(
            "{} prediction(s) name unknown qids",
            out.report.unknown_qids.len()
        );
    }
    emit(
        &a.report,
        format!("{}\n", serde_json::to_string_pretty(&out.report)?).as_bytes(),
    )?;
    println!("{}", out.report.summary_line());
    Ok(())
}

fn cmd_schema(a: GraphArg) -> anyhow::Result<()> {
    let g = read_graph_file(&a.graph)?;
    match derive_schema(&g) {
        Ok(doc) => {
            print!("{}", doc.to_prompt_json());
            Ok(())
        }
        Err(conflicts) => {
            for c in &conflicts {
                eprintln!("{c}");
            }
            bail!("{} property datatype conflict(s)", conflicts.len())
        }
    }
}

fn cmd_stats(a: GraphArg) -> anyhow::Result<()> {
    let g = read_graph_file(&a.graph)?;
    println!("{}\n{}", GraphStats::HEADER, GraphStats::of(&g).row());
    Ok(())
}

fn cmd_validate(a: GraphArg) -> anyhow::Result<bool> {
    let bytes =
        std::fs::read(&a.graph).with_context(|| format!("cannot read {}", a.graph.display()))?;
    let g = decode_graph_lenient(&bytes)?;
    let violations = g.validate();
    for v in &violations {
        println!("{}\t{}\t{}", v.kind, v.id, v.message);
    }
    log::info!("{} violation(s)", violations.len());
    Ok(violations.is_empty())
}

/// The error chain, skipping causes whose text a library error already embeds.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg = format!("{msg}: {c}");
        }
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let _ = ctrlc::set_handler(|| {
        if CANCEL.swap(true, Ordering::SeqCst) {
            std::process::exit(130);
        }
        eprintln!("interrupted; finishing with partial output (press Ctrl-C again to abort)");
    });
    let res = match cli.cmd {
        Cmd::Transform(a) => cmd_transform(a).map(|_| true),
        Cmd::Generate(a) => cmd_generate(a).map(|_| true),
        Cmd::Eval(a) => cmd_eval(a).map(|_| true),
        Cmd::Schema(a) => cmd_schema(a).map(|_| true),
        Cmd::Stats(a) => cmd_stats(a).map(|_| true),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match res {
        Ok(_) if cancelled() => ExitCode::from(130),
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}
