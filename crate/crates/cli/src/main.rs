use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use arcsym::harness::{run_eval, run_task, Config, Endpoints, HarnessError, ProposerKind, SelectorKind};
use arcsym::hypothesis::{aggregate_detections, propose_builtin, propose_external};
use arcsym::transport::{CommandTransport, RetryPolicy, Transport, TransportError};
use arcsym::{abstract_scene, parse_task, TaskRecord};

/// Credential sent as a bearer token to HTTP endpoints.
const API_KEY_VAR: &str = "ARCSYM_API_KEY";

#[derive(Parser)]
#[command(name = "arcsym", version, about = "Symbolic solver for ARC-style grid tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one task file and print two attempts per test input.
    Solve { task: PathBuf },
    /// Evaluate every task file in a directory.
    Eval { dir: PathBuf },
    /// Print the scene graph of every grid in a task.
    Abstract { task: PathBuf },
    /// Print per-pair detections and their aggregate ranking.
    Detect { task: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposerArg {
    Builtin,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SelectorArg {
    TrainConsistency,
    Agreement,
    External,
}

#[derive(Args)]
struct Options {
    /// External solver samples per test input (3 to 10).
    #[arg(long, global = true, default_value_t = 5, value_parser = clap::value_parser!(u8).range(3..=10))]
    attempts: u8,
    #[arg(long, global = true, default_value_t = 3)]
    top_k: usize,
    /// Detection runs per training pair with the external proposer.
    #[arg(long, global = true, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    max_depth: u8,
    #[arg(long, global = true, default_value_t = 0.70)]
    symmetry_threshold: f64,
    #[arg(long, global = true, value_enum, default_value = "builtin")]
    proposer: ProposerArg,
    #[arg(long, global = true, value_enum, default_value = "train_consistency")]
    selector: SelectorArg,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Detector endpoint: an http(s) URL or a command reading JSON on stdin.
    #[arg(long, global = true)]
    proposer_endpoint: Option<String>,
    /// Solver endpoint, used when no program survives.
    #[arg(long, global = true)]
    solver_endpoint: Option<String>,
    /// Meta-selector endpoint.
    #[arg(long, global = true)]
    selector_endpoint: Option<String>,
}

impl Options {
    fn config(&self) -> Config {
        Config {
            attempts: self.attempts.into(),
            top_k: self.top_k,
            repetitions: self.repetitions,
            max_depth: self.max_depth.into(),
            symmetry_threshold: self.symmetry_threshold,
            proposer: match self.proposer {
                ProposerArg::Builtin => ProposerKind::Builtin,
                ProposerArg::External => ProposerKind::External,
            },
            selector: match self.selector {
                SelectorArg::TrainConsistency => SelectorKind::TrainConsistency,
                SelectorArg::Agreement => SelectorKind::Agreement,
                SelectorArg::External => SelectorKind::External,
            },
            seed: self.seed,
            ..Config::default()
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot write {0}: {1}")]
    Write(PathBuf, std::io::Error),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// JSON over HTTP POST.
struct HttpTransport {
    url: String,
    api_key: Option<String>,
}

impl Transport for HttpTransport {
    fn send(&self, request: &Value) -> Result<String, TransportError> {
        let mut call = ureq::post(&self.url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        match call.send_json(request) {
            Ok(mut resp) => resp.body_mut().read_to_string().map_err(|e| TransportError::Remote(e.to_string())),
            Err(ureq::Error::StatusCode(code)) => Err(TransportError::Remote(format!("HTTP {code}"))),
            Err(e) => Err(TransportError::Unreachable(e.to_string())),
        }
    }
}

fn transport(spec: &str) -> Box<dyn Transport> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        Box::new(HttpTransport { url: spec.to_string(), api_key: std::env::var(API_KEY_VAR).ok() })
    } else {
        let mut words = spec.split_whitespace().map(str::to_string);
        let program = words.next().unwrap_or_default();
        Box::new(CommandTransport::new(program, words.collect()))
    }
}

fn load(path: &Path) -> Result<TaskRecord, CliError> {
    let raw = std::fs::read(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(parse_task(&id, &raw).map_err(HarnessError::from)?)
}

fn emit(value: &Value, report: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("plain JSON");
    match report {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Write(path.to_path_buf(), e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn solve(task: &TaskRecord, config: &Config, endpoints: &Endpoints) -> Result<Value, CliError> {
    let outcome = run_task(task, config, endpoints)?;
    let report = &outcome.analysis.report;
    let tests: Vec<Value> = outcome
        .tests
        .iter()
        .map(|t| {
            json!({
                "attempts": [t.submission.first, t.submission.second],
                "sources": [t.submission.first_source, t.submission.second_source],
                "route": t.route,
                "votes_used": t.votes_used,
                "per_cell_agreement": t.per_cell_agreement,
                "low_confidence": t.low_confidence,
                "correct": t.correct,
            })
        })
        .collect();
    Ok(json!({
        "task_id": outcome.task_id,
        "solved": outcome.solved(),
        "selected_program": report.selected.as_ref().map(|p| p.canonical()),
        "selection_rationale": report.selection_rationale,
        "surviving_programs": report.surviving.len(),
        "hint": report.hint,
        "ranked_patterns": outcome.analysis.ranked.iter()
            .map(|r| json!({"pattern_name": r.pattern_name, "params": r.params, "count": r.count}))
            .collect::<Vec<_>>(),
        "tests": tests,
    }))
}

fn scenes(task: &TaskRecord) -> Value {
    let pairs: Vec<Value> = task
        .train_pairs
        .iter()
        .map(|p| json!({"input": abstract_scene(&p.input).to_json(), "output": abstract_scene(&p.output).to_json()}))
        .collect();
    let tests: Vec<Value> = task.test_inputs.iter().map(|g| abstract_scene(g).to_json()).collect();
    json!({"task_id": task.task_id, "train": pairs, "test": tests})
}

fn detect(task: &TaskRecord, config: &Config, endpoints: &Endpoints) -> Result<Value, CliError> {
    let mut runs = Vec::new();
    let mut per_pair = Vec::new();
    for pair in &task.train_pairs {
        let (si, so) = (abstract_scene(&pair.input), abstract_scene(&pair.output));
        let pair_runs = match config.proposer {
            ProposerKind::Builtin => vec![propose_builtin(&si, &so)],
            ProposerKind::External => {
                let t = endpoints.proposer.ok_or(HarnessError::MissingEndpoint("proposer"))?;
                (0..config.repetitions)
                    .map(|_| propose_external((&pair.input, &pair.output), (&si, &so), t, &endpoints.policy))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(HarnessError::from)?
            }
        };
        per_pair.push(json!(pair_runs
            .iter()
            .map(|run| run
                .iter()
                .map(|d| json!({
                    "pattern_name": d.pattern_name,
                    "pattern_detected": d.detected,
                    "params": d.params,
                    "reason": d.reason,
                    "evidence": d.evidence.iter().take(5).map(|p| p.canonical()).collect::<Vec<_>>(),
                }))
                .collect::<Vec<_>>())
            .collect::<Vec<_>>()));
        runs.extend(pair_runs);
    }
    let ranked = aggregate_detections(&runs, config.top_k);
    Ok(json!({
        "task_id": task.task_id,
        "detections": per_pair,
        "ranked": ranked.iter()
            .map(|r| json!({"pattern_name": r.pattern_name, "params": r.params, "count": r.count}))
            .collect::<Vec<_>>(),
    }))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let opts = &cli.opts;
    let config = opts.config();
    let proposer = opts.proposer_endpoint.as_deref().map(transport);
    let solver = opts.solver_endpoint.as_deref().map(transport);
    let selector = opts.selector_endpoint.as_deref().map(transport);
    let endpoints = Endpoints {
        proposer: proposer.as_deref(),
        solver: solver.as_deref(),
        selector: selector.as_deref(),
        policy: RetryPolicy::default(),
    };
    let report = opts.report.as_deref();
    match &cli.command {
        Command::Solve { task } => emit(&solve(&load(task)?, &config, &endpoints)?, report),
        Command::Abstract { task } => emit(&scenes(&load(task)?), report),
        Command::Detect { task } => emit(&detect(&load(task)?, &config, &endpoints)?, report),
        Command::Eval { dir } => {
            let eval = run_eval(dir, &config, &endpoints)?;
            eprintln!(
                "{} task(s), {} solved, {} errored, pass@2 {:.4}, {:.2?}",
                eval.task_count, eval.solved_count, eval.errored_count, eval.pass_at_2, eval.runtime.total
            );
            let value = serde_json::to_value(&eval).expect("plain data");
            emit(&value, report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
