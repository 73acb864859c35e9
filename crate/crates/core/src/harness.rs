//! Per-task pipeline, two-attempt submission and directory evaluation.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::consistency::{filter_consistent, ConsistencyReport, HintContext};
use crate::dsl::{run_program, Program};
use crate::grid::{parse_task, Grid, ParseError, TaskRecord};
use crate::hypothesis::{
    aggregate_detections, instantiate_candidates, propose_builtin_with, propose_external, CandidateSet, DeepSearch,
    Detection, HypothesisError, ProposerConfig, RankedPattern,
};
use crate::scene::{abstract_scene, SceneGraph};
use crate::solution::{
    best_effort, solve_symmetry, solve_task, symmetry_score, ExternalSolver, Provenance, SolveContext, SolveResult,
    SolutionError,
};
use crate::transport::{run_bounded, send_with_retry, RetryPolicy, Transport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposerKind {
    Builtin,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    TrainConsistency,
    Agreement,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// External solver samples per test input.
    pub attempts: usize,
    pub top_k: usize,
    /// Detection runs per training pair for the external proposer.
    pub repetitions: usize,
    pub max_depth: usize,
    pub symmetry_threshold: f64,
    pub concurrency_cap: usize,
    /// Candidate programs per training pair.
    pub budget: usize,
    pub proposer: ProposerKind,
    pub selector: SelectorKind,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            attempts: 5,
            top_k: 3,
            repetitions: 5,
            max_depth: 2,
            symmetry_threshold: 0.70,
            concurrency_cap: 5,
            budget: crate::hypothesis::DEFAULT_BUDGET,
            proposer: ProposerKind::Builtin,
            selector: SelectorKind::TrainConsistency,
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if !(3..=10).contains(&self.attempts) {
            return bad(format!("attempts must lie in 3..=10, got {}", self.attempts));
        }
        if self.top_k == 0 || self.repetitions == 0 || self.concurrency_cap == 0 || self.budget == 0 {
            return bad("top_k, repetitions, concurrency_cap and budget must be positive".into());
        }
        if !(1..=2).contains(&self.max_depth) {
            return bad(format!("max_depth must be 1 or 2, got {}", self.max_depth));
        }
        if !(0.0..=1.0).contains(&self.symmetry_threshold) {
            return bad(format!("symmetry_threshold must lie in [0, 1], got {}", self.symmetry_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no ground truth to score against")]
    MissingGroundTruth,
    #[error("no {0} endpoint configured")]
    MissingEndpoint(&'static str),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
}

/// External services the pipeline may call. Unset endpoints make the
/// corresponding external options unavailable.
#[derive(Clone, Copy, Default)]
pub struct Endpoints<'a> {
    pub proposer: Option<&'a dyn Transport>,
    pub solver: Option<&'a dyn Transport>,
    pub selector: Option<&'a dyn Transport>,
    pub policy: RetryPolicy,
}

/// Everything learned from the training pairs.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub runs: Vec<Vec<Detection>>,
    pub ranked: Vec<RankedPattern>,
    pub candidate_sets: Vec<CandidateSet>,
    pub report: ConsistencyReport,
}

fn builtin_runs(scenes: &[(SceneGraph, SceneGraph)], config: &ProposerConfig) -> Vec<Vec<Detection>> {
    scenes.iter().map(|(i, o)| propose_builtin_with(i, o, config)).collect()
}

fn external_runs(
    task: &TaskRecord,
    scenes: &[(SceneGraph, SceneGraph)],
    config: &Config,
    endpoints: &Endpoints,
) -> Result<Vec<Vec<Detection>>, HarnessError> {
    let transport = endpoints.proposer.ok_or(HarnessError::MissingEndpoint("proposer"))?;
    let jobs: Vec<usize> =
        (0..task.train_pairs.len()).flat_map(|p| std::iter::repeat_n(p, config.repetitions)).collect();
    let results = run_bounded(&jobs, config.concurrency_cap, |&p| {
        let pair = &task.train_pairs[p];
        let (si, so) = &scenes[p];
        propose_external((&pair.input, &pair.output), (si, so), transport, &endpoints.policy)
    });
    let mut runs = Vec::new();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(d) => runs.push(d),
            Err(e) => {
                log::warn!("{}: detection run failed: {e}", task.task_id);
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) if runs.is_empty() => Err(e.into()),
        _ => Ok(runs),
    }
}

fn consistency_pass(
    task: &TaskRecord,
    scenes: &[(SceneGraph, SceneGraph)],
    runs: Vec<Vec<Detection>>,
    test_scene: Option<&SceneGraph>,
    config: &Config,
) -> Analysis {
    let ranked = aggregate_detections(&runs, config.top_k);
    let candidate_sets: Vec<CandidateSet> = scenes
        .iter()
        .enumerate()
        .map(|(i, (scene, _))| {
            let inst = instantiate_candidates(&ranked, scene, config.max_depth, config.budget);
            CandidateSet {
                example_index: i,
                candidates: inst.programs,
                detection_counts: crate::hypothesis::detection_counts(&runs),
                budget_exceeded: inst.budget_exceeded,
            }
        })
        .collect();
    let hint = HintContext { ranked: &ranked, runs: runs.len(), test_scene };
    let report = filter_consistent(&candidate_sets, &task.train_pairs, &hint);
    Analysis { runs, ranked, candidate_sets, report }
}

/// Detects patterns on every training pair, instantiates candidates and
/// filters them for consistency. With the builtin proposer a failed shallow
/// search is retried with the full two-step search.
pub fn analyze(task: &TaskRecord, config: &Config, endpoints: &Endpoints) -> Result<Analysis, HarnessError> {
    config.validate()?;
    let scenes: Vec<(SceneGraph, SceneGraph)> =
        task.train_pairs.iter().map(|p| (abstract_scene(&p.input), abstract_scene(&p.output))).collect();
    let test_scene = task.test_inputs.first().map(abstract_scene);
    match config.proposer {
        ProposerKind::External => {
            let runs = external_runs(task, &scenes, config, endpoints)?;
            Ok(consistency_pass(task, &scenes, runs, test_scene.as_ref(), config))
        }
        ProposerKind::Builtin => {
            let mut proposer = ProposerConfig { max_depth: config.max_depth, ..ProposerConfig::default() };
            let first = consistency_pass(task, &scenes, builtin_runs(&scenes, &proposer), test_scene.as_ref(), config);
            if first.report.selected.is_some() || config.max_depth < 2 {
                return Ok(first);
            }
            proposer.deep_search = DeepSearch::Always;
            log::debug!("{}: no consistent program, searching two-step explanations", task.task_id);
            Ok(consistency_pass(task, &scenes, builtin_runs(&scenes, &proposer), test_scene.as_ref(), config))
        }
    }
}

/// How a pool entry can be replayed on the training pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    Program(Program),
    Symmetry,
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolEntry {
    pub grid: Grid,
    pub source: String,
    #[serde(skip)]
    pub recipe: Recipe,
}

/// Candidate predictions for one test input, primary route first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePool {
    pub test_index: usize,
    pub entries: Vec<PoolEntry>,
}

/// Distinct alternatives added after the routed prediction.
pub const MAX_ALTERNATIVES: usize = 3;
const MAX_SURVIVORS_REPLAYED: usize = 2_000;

fn entry(grid: Grid, source: &str, recipe: Recipe) -> PoolEntry {
    PoolEntry { grid, source: source.to_string(), recipe }
}

/// Collects the routed prediction, external samples, outputs of the other
/// surviving programs (most frequent first), symmetry completion and the
/// best-effort guess.
pub fn build_pool(
    test_index: usize,
    test_input: &Grid,
    routed: Option<&SolveResult>,
    analysis: &Analysis,
    ctx: &SolveContext,
) -> CandidatePool {
    let mut entries = Vec::new();
    let mut used_route = None;
    match routed {
        Some(r) => {
            let recipe = match (&r.program, r.provenance()) {
                (Some(p), _) => Recipe::Program(p.clone()),
                (None, Provenance::SymmetrySolver) => Recipe::Symmetry,
                _ => Recipe::Opaque,
            };
            used_route = Some(r.provenance());
            entries.push(entry(r.final_prediction.clone(), r.provenance().as_str(), recipe));
            if r.provenance() == Provenance::ExternalSolver {
                for (g, p) in &r.candidates {
                    entries.push(entry(g.clone(), p.as_str(), Recipe::Opaque));
                }
            }
        }
        None => entries.push(entry(test_input.clone(), "identity_placeholder", Recipe::Opaque)),
    }
    let mut extra: Vec<PoolEntry> = Vec::new();
    let is_new = |g: &Grid, entries: &[PoolEntry], extra: &[PoolEntry]| {
        entries.iter().chain(extra).all(|e| &e.grid != g)
    };

    let mut tallies: Vec<(Grid, usize, &Program)> = Vec::new();
    for p in analysis.report.survivors.iter().take(MAX_SURVIVORS_REPLAYED) {
        let Ok(g) = run_program(p, test_input) else { continue };
        match tallies.iter_mut().find(|(t, _, _)| *t == g) {
            Some((_, n, _)) => *n += 1,
            None => tallies.push((g, 1, p)),
        }
    }
    tallies.sort_by_key(|(_, n, _)| std::cmp::Reverse(*n));
    for (g, _, p) in tallies {
        if extra.len() < MAX_ALTERNATIVES && is_new(&g, &entries, &extra) {
            extra.push(entry(g, Provenance::ExecutedProgram.as_str(), Recipe::Program(p.clone())));
        }
    }
    if used_route != Some(Provenance::SymmetrySolver) && extra.len() < MAX_ALTERNATIVES {
        let a = symmetry_score(test_input);
        if a.score > ctx.symmetry_threshold {
            if let Ok(g) = solve_symmetry(test_input, &a) {
                if is_new(&g, &entries, &extra) {
                    extra.push(entry(g, Provenance::SymmetrySolver.as_str(), Recipe::Symmetry));
                }
            }
        }
    }
    if used_route != Some(Provenance::BestEffort) && extra.is_empty() {
        if let Some((g, p)) = best_effort(test_input, ctx) {
            if is_new(&g, &entries, &extra) {
                extra.push(entry(g, Provenance::BestEffort.as_str(), Recipe::Program(p)));
            }
        }
    }
    entries.extend(extra);
    CandidatePool { test_index, entries }
}

/// Picks one pool entry.
pub enum Strategy<'a> {
    /// Most training pairs reproduced by the entry's recipe, then most
    /// training cells matched.
    TrainConsistency,
    /// Most identical entries in the pool, then highest mean cell agreement.
    Agreement,
    /// Asks an endpoint for an index; falls back to train consistency.
    External { transport: &'a dyn Transport, policy: RetryPolicy },
}

impl<'a> Strategy<'a> {
    pub fn from_config(config: &Config, endpoints: &Endpoints<'a>) -> Result<Self, HarnessError> {
        Ok(match config.selector {
            SelectorKind::TrainConsistency => Strategy::TrainConsistency,
            SelectorKind::Agreement => Strategy::Agreement,
            SelectorKind::External => Strategy::External {
                transport: endpoints.selector.ok_or(HarnessError::MissingEndpoint("selector"))?,
                policy: endpoints.policy,
            },
        })
    }
}

fn replay(recipe: &Recipe, input: &Grid) -> Option<Grid> {
    match recipe {
        Recipe::Program(p) => run_program(p, input).ok(),
        Recipe::Symmetry => solve_symmetry(input, &symmetry_score(input)).ok(),
        Recipe::Opaque => None,
    }
}

fn train_fit(e: &PoolEntry, task: &TaskRecord) -> (usize, usize) {
    let mut exact = 0;
    let mut cells = 0;
    for pair in &task.train_pairs {
        let Some(out) = replay(&e.recipe, &pair.input) else { continue };
        if out.dims() != pair.output.dims() {
            continue;
        }
        let same = out.cells().iter().zip(pair.output.cells()).filter(|(a, b)| a == b).count();
        cells += same;
        exact += usize::from(same == out.cells().len());
    }
    (exact, cells)
}

fn agreement_key(i: usize, entries: &[PoolEntry]) -> (usize, u64) {
    let g = &entries[i].grid;
    let copies = entries.iter().filter(|e| &e.grid == g).count();
    let mut shared = 0usize;
    let mut total = 0usize;
    for (j, e) in entries.iter().enumerate() {
        if j != i && e.grid.dims() == g.dims() {
            shared += e.grid.cells().iter().zip(g.cells()).filter(|(a, b)| a == b).count();
            total += g.cells().len();
        }
    }
    // Fixed-point so the key orders exactly.
    let mean = if total == 0 { 0 } else { (shared as u128 * 1_000_000_000 / total as u128) as u64 };
    (copies, mean)
}

/// Index of the earliest entry with the greatest key.
fn argmax_first<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> Option<usize> {
    (0..n).fold(None, |best: Option<(usize, K)>, i| {
        let k = key(i);
        match best {
            Some((_, ref b)) if *b >= k => best,
            _ => Some((i, k)),
        }
    })
    .map(|(i, _)| i)
}

fn selection_request(pool: &CandidatePool, task: &TaskRecord) -> Value {
    let candidates: Vec<Value> = pool
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"index": i, "grid": e.grid, "source": e.source}))
        .collect();
    json!({
        "demonstrations": task.train_pairs,
        "test_input": task.test_inputs.get(pool.test_index),
        "candidates": candidates,
    })
}

fn first_index(body: &str) -> Option<usize> {
    let start = body.find(|c: char| c.is_ascii_digit())?;
    let digits: String = body[start..].chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

/// Chooses one entry of `pool` and returns its index.
pub fn meta_select(pool: &CandidatePool, task: &TaskRecord, strategy: &Strategy) -> Option<usize> {
    let n = pool.entries.len();
    if n == 0 {
        return None;
    }
    match strategy {
        Strategy::TrainConsistency => argmax_first(n, |i| train_fit(&pool.entries[i], task)),
        Strategy::Agreement => argmax_first(n, |i| agreement_key(i, &pool.entries)),
        Strategy::External { transport, policy } => {
            let reply = send_with_retry(*transport, &selection_request(pool, task), policy);
            match reply.map(|body| first_index(&body)) {
                Ok(Some(i)) if i < n => Some(i),
                other => {
                    log::warn!("external selection unusable ({other:?}), using train consistency");
                    meta_select(pool, task, &Strategy::TrainConsistency)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Submission {
    pub first: Grid,
    pub second: Grid,
    pub first_source: String,
    pub second_source: String,
}

/// First attempt is the selected entry. Every copy of it is then removed and
/// the second attempt is selected from the rest; with nothing left the first
/// attempt is repeated.
pub fn assemble_pass2(pool: &CandidatePool, task: &TaskRecord, strategy: &Strategy) -> Result<Submission, HarnessError> {
    let i = meta_select(pool, task, strategy).ok_or(HarnessError::EmptyPool)?;
    let first = &pool.entries[i];
    let rest = CandidatePool {
        test_index: pool.test_index,
        entries: pool.entries.iter().filter(|e| e.grid != first.grid).cloned().collect(),
    };
    let second = match meta_select(&rest, task, strategy) {
        Some(j) => &rest.entries[j],
        None => first,
    };
    Ok(Submission {
        first: first.grid.clone(),
        second: second.grid.clone(),
        first_source: first.source.clone(),
        second_source: second.source.clone(),
    })
}

/// Whether either attempt equals the ground truth exactly.
pub fn score_pass2(submission: &Submission, truth: Option<&Grid>) -> Result<bool, HarnessError> {
    let truth = truth.ok_or(HarnessError::MissingGroundTruth)?;
    Ok(&submission.first == truth || &submission.second == truth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub route: Option<Provenance>,
    pub votes_used: usize,
    pub per_cell_agreement: f64,
    pub low_confidence: bool,
    pub pool: CandidatePool,
    pub submission: Submission,
    pub correct: Option<bool>,
    pub first_correct: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub task_id: String,
    pub analysis: Analysis,
    pub tests: Vec<TestOutcome>,
}

impl TaskOutcome {
    /// Whether every test input is answered within two attempts; `None`
    /// without ground truth.
    pub fn solved(&self) -> Option<bool> {
        self.tests.iter().map(|t| t.correct).collect::<Option<Vec<bool>>>().map(|v| v.iter().all(|&c| c))
    }

    pub fn solved_first_attempt(&self) -> Option<bool> {
        self.tests.iter().map(|t| t.first_correct).collect::<Option<Vec<bool>>>().map(|v| v.iter().all(|&c| c))
    }
}

/// Runs the full pipeline on one task.
pub fn run_task(task: &TaskRecord, config: &Config, endpoints: &Endpoints) -> Result<TaskOutcome, HarnessError> {
    let analysis = analyze(task, config, endpoints)?;
    let strategy = Strategy::from_config(config, endpoints)?;
    let external = endpoints.solver.map(|transport| ExternalSolver {
        transport,
        policy: endpoints.policy,
        concurrency: config.concurrency_cap,
        seed: config.seed,
    });
    let ctx = SolveContext {
        train: &task.train_pairs,
        ranked: &analysis.ranked,
        attempts: config.attempts,
        symmetry_threshold: config.symmetry_threshold,
        external: external.as_ref(),
    };
    let mut tests = Vec::new();
    for (i, input) in task.test_inputs.iter().enumerate() {
        let routed = match solve_task(&analysis.report, input, &ctx) {
            Ok(r) => Some(r),
            Err(SolutionError::Unsolvable) => None,
            Err(e) => return Err(e.into()),
        };
        let pool = build_pool(i, input, routed.as_ref(), &analysis, &ctx);
        let submission = assemble_pass2(&pool, task, &strategy)?;
        let truth = task.test_outputs.as_ref().and_then(|t| t.get(i));
        tests.push(TestOutcome {
            route: routed.as_ref().map(SolveResult::provenance),
            votes_used: routed.as_ref().map_or(0, |r| r.votes_used),
            per_cell_agreement: routed.as_ref().map_or(0.0, |r| r.per_cell_agreement),
            low_confidence: routed.as_ref().is_none_or(|r| r.low_confidence),
            correct: score_pass2(&submission, truth).ok(),
            first_correct: truth.map(|t| &submission.first == t),
            pool,
            submission,
        });
    }
    Ok(TaskOutcome { task_id: task.task_id.clone(), analysis, tests })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub route: Option<Provenance>,
    pub first_source: String,
    pub second_source: String,
    pub votes_used: usize,
    pub per_cell_agreement: f64,
    pub low_confidence: bool,
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub solved: Option<bool>,
    pub first_attempt_correct: Option<bool>,
    pub error: Option<String>,
    pub selected_program: Option<String>,
    pub selected_depth: Option<usize>,
    pub surviving_programs: usize,
    pub hint: bool,
    pub tests: Vec<TestReport>,
}

impl TaskReport {
    fn from_outcome(o: &TaskOutcome) -> Self {
        let selected = o.analysis.report.selected.as_ref();
        Self {
            solved: o.solved(),
            first_attempt_correct: o.solved_first_attempt(),
            error: None,
            selected_program: selected.map(Program::canonical),
            selected_depth: selected.map(Program::depth),
            surviving_programs: o.analysis.report.surviving.len(),
            hint: o.analysis.report.hint.is_some(),
            tests: o
                .tests
                .iter()
                .map(|t| TestReport {
                    route: t.route,
                    first_source: t.submission.first_source.clone(),
                    second_source: t.submission.second_source.clone(),
                    votes_used: t.votes_used,
                    per_cell_agreement: t.per_cell_agreement,
                    low_confidence: t.low_confidence,
                    correct: t.correct,
                })
                .collect(),
        }
    }

    fn failed(e: &HarnessError) -> Self {
        Self {
            solved: None,
            first_attempt_correct: None,
            error: Some(e.to_string()),
            selected_program: None,
            selected_depth: None,
            surviving_programs: 0,
            hint: false,
            tests: Vec::new(),
        }
    }
}

/// Wall-clock figures; kept out of the serialized report so that reports of
/// identical runs are byte-identical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuntimeStats {
    pub total: Duration,
    pub per_task: BTreeMap<String, Duration>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task_count: usize,
    pub solved_count: usize,
    pub errored_count: usize,
    /// Solved tasks over all tasks; zero for an empty evaluation.
    pub pass_at_2: f64,
    pub empty: bool,
    pub config: Config,
    pub tasks: BTreeMap<String, TaskReport>,
    #[serde(skip)]
    pub runtime: RuntimeStats,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

/// Evaluates already loaded tasks; entries that failed to load count as
/// errored.
pub fn evaluate(
    tasks: Vec<(String, Result<TaskRecord, HarnessError>)>,
    config: &Config,
    endpoints: &Endpoints,
) -> Result<EvalReport, HarnessError> {
    config.validate()?;
    Strategy::from_config(config, endpoints)?;
    if config.proposer == ProposerKind::External && endpoints.proposer.is_none() {
        return Err(HarnessError::MissingEndpoint("proposer"));
    }
    let start = Instant::now();
    let results: Vec<(String, TaskReport, Duration)> = tasks
        .into_par_iter()
        .map(|(id, task)| {
            let t0 = Instant::now();
            let report = match task.and_then(|t| run_task(&t, config, endpoints)) {
                Ok(outcome) => TaskReport::from_outcome(&outcome),
                Err(e) => {
                    log::warn!("{id}: {e}");
                    TaskReport::failed(&e)
                }
            };
            (id, report, t0.elapsed())
        })
        .collect();
    let mut runtime = RuntimeStats::default();
    let mut reports = BTreeMap::new();
    for (id, report, took) in results {
        runtime.per_task.insert(id.clone(), took);
        reports.insert(id, report);
    }
    runtime.total = start.elapsed();
    let task_count = reports.len();
    let solved_count = reports.values().filter(|r| r.solved == Some(true)).count();
    let errored_count = reports.values().filter(|r| r.error.is_some()).count();
    Ok(EvalReport {
        task_count,
        solved_count,
        errored_count,
        pass_at_2: if task_count == 0 { 0.0 } else { solved_count as f64 / task_count as f64 },
        empty: task_count == 0,
        config: config.clone(),
        tasks: reports,
        runtime,
    })
}

/// Evaluates every `*.json` task file in `dir`; the file stem is the task id.
pub fn run_eval(dir: &Path, config: &Config, endpoints: &Endpoints) -> Result<EvalReport, HarnessError> {
    let io = |e: std::io::Error, p: &Path| HarnessError::Io { path: p.display().to_string(), reason: e.to_string() };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| io(e, dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let tasks = files
        .iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let task = std::fs::read(p).map_err(|e| io(e, p)).and_then(|raw| Ok(parse_task(&id, &raw)?));
            (id, task)
        })
        .collect();
    evaluate(tasks, config, endpoints)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn pool(grids: &[Grid]) -> CandidatePool {
        CandidatePool {
            test_index: 0,
            entries: grids.iter().map(|g| entry(g.clone(), "x", Recipe::Opaque)).collect(),
        }
    }

    fn empty_task() -> TaskRecord {
        TaskRecord { task_id: "t".into(), train_pairs: vec![], test_inputs: vec![], test_outputs: None }
    }

    #[test]
    fn defaults_and_validation() {
        let c = Config::default();
        assert_eq!((c.attempts, c.top_k, c.repetitions, c.max_depth, c.concurrency_cap), (5, 3, 5, 2, 5));
        assert_eq!(c.symmetry_threshold, 0.70);
        assert!(c.validate().is_ok());
        assert!(Config { attempts: 2, ..c.clone() }.validate().is_err());
        assert!(Config { attempts: 11, ..c.clone() }.validate().is_err());
        assert!(Config { attempts: 10, ..c }.validate().is_ok());
    }

    #[test]
    fn removal_takes_every_copy_of_the_first() {
        let (a, b, c) = (g(&[&[1]]), g(&[&[2]]), g(&[&[3]]));
        let p = pool(&[a.clone(), a.clone(), b.clone(), c]);
        let s = assemble_pass2(&p, &empty_task(), &Strategy::Agreement).unwrap();
        assert_eq!((s.first, s.second), (a, b));
    }

    #[test]
    fn single_entry_pool_repeats() {
        let a = g(&[&[1]]);
        let s = assemble_pass2(&pool(&[a.clone(), a.clone()]), &empty_task(), &Strategy::TrainConsistency).unwrap();
        assert_eq!((s.first.clone(), s.second.clone()), (a.clone(), a));
        assert_eq!(score_pass2(&s, None), Err(HarnessError::MissingGroundTruth));
    }

    #[test]
    fn external_selection_falls_back() {
        let p = pool(&[g(&[&[1]]), g(&[&[2]])]);
        let picks_one = |_: &Value| Ok("I choose candidate 1.".to_string());
        let s = Strategy::External { transport: &picks_one, policy: RetryPolicy::immediate(0) };
        assert_eq!(meta_select(&p, &empty_task(), &s), Some(1));
        let nonsense = |_: &Value| Ok("none of them".to_string());
        let s = Strategy::External { transport: &nonsense, policy: RetryPolicy::immediate(0) };
        assert_eq!(meta_select(&p, &empty_task(), &s), Some(0));
    }

    #[test]
    fn external_selector_needs_an_endpoint() {
        let c = Config { selector: SelectorKind::External, ..Config::default() };
        assert!(matches!(
            Strategy::from_config(&c, &Endpoints::default()),
            Err(HarnessError::MissingEndpoint("selector"))
        ));
    }

    #[test]
    fn empty_evaluation() {
        let r = evaluate(Vec::new(), &Config::default(), &Endpoints::default()).unwrap();
        assert!(r.empty);
        assert_eq!((r.task_count, r.pass_at_2), (0, 0.0));
    }
}
