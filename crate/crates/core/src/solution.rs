//! Turning a consistency report into test predictions: direct execution,
//! symmetry completion, voting over external samples, or a best-effort guess.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::consistency::{ConsistencyReport, Hint};
use crate::dsl::{run_program, DslError, Program};
use crate::grid::{Grid, Pair, Pos};
use crate::hypothesis::{instantiate_candidates, RankedPattern};
use crate::scene::{abstract_scene, find_background};
use crate::transport::{run_bounded, send_with_retry, RetriesExhausted, RetryPolicy, Transport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("program execution failed: {0}")]
    ExecutionFailed(DslError),
    #[error("no occluded region to complete")]
    NoOcclusion,
    #[error("occluded cells {0:?} have no visible counterpart")]
    IncompleteRestoration(Vec<Pos>),
    #[error("no candidates to vote over")]
    NoCandidates,
    #[error("attempts must lie in 3..=10, got {0}")]
    AttemptsOutOfRange(usize),
    #[error("external solver failed: {0}")]
    External(String),
    #[error("every route failed")]
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExecutedProgram,
    SymmetrySolver,
    ExternalSolver,
    /// Route-four guess from the top ranked pattern; low confidence.
    BestEffort,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ExecutedProgram => "executed_program",
            Provenance::SymmetrySolver => "symmetry_solver",
            Provenance::ExternalSolver => "external_solver",
            Provenance::BestEffort => "best_effort",
        }
    }
}

/// Runs the selected program on a test input.
pub fn solve_direct(program: &Program, test_input: &Grid) -> Result<Grid, SolutionError> {
    run_program(program, test_input).map_err(SolutionError::ExecutionFailed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    HorizontalMirror,
    VerticalMirror,
    Rotate180,
    Rotate90,
    Transpose,
}

impl Transform {
    pub const ALL: [Transform; 5] = [
        Transform::HorizontalMirror,
        Transform::VerticalMirror,
        Transform::Rotate180,
        Transform::Rotate90,
        Transform::Transpose,
    ];

    /// Image of a cell, or `None` when the transform does not preserve the
    /// grid's shape.
    pub fn apply(&self, (y, x): Pos, (h, w): (usize, usize)) -> Option<Pos> {
        match self {
            Transform::HorizontalMirror => Some((y, w - 1 - x)),
            Transform::VerticalMirror => Some((h - 1 - y, x)),
            Transform::Rotate180 => Some((h - 1 - y, w - 1 - x)),
            Transform::Rotate90 => (h == w).then(|| (x, w - 1 - y)),
            Transform::Transpose => (h == w).then_some((x, y)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryAssessment {
    pub score: f64,
    pub best_transform: Transform,
    pub occluded_region: Vec<Pos>,
    /// Every transform's score, in `Transform::ALL` order.
    pub scores: Vec<(Transform, f64)>,
}

/// Solid rectangles whose color occurs nowhere else, largest first.
pub fn occlusion_candidates(g: &Grid) -> Vec<Vec<Pos>> {
    let bg = find_background(g);
    let mut found: Vec<(usize, Vec<Pos>)> = Vec::new();
    for c in 0..10u8 {
        if c == bg {
            continue;
        }
        let cells: Vec<Pos> = g.positions().filter(|&(y, x)| g.get(y, x) == c).collect();
        let Some(y0) = cells.iter().map(|p| p.0).min() else { continue };
        let y1 = cells.iter().map(|p| p.0).max().expect("non-empty");
        let x0 = cells.iter().map(|p| p.1).min().expect("non-empty");
        let x1 = cells.iter().map(|p| p.1).max().expect("non-empty");
        if (y1 - y0 + 1) * (x1 - x0 + 1) == cells.len() {
            found.push((cells.len(), cells));
        }
    }
    found.sort_by_key(|(area, _)| std::cmp::Reverse(*area));
    found.into_iter().map(|(_, cells)| cells).collect()
}

fn transform_score(g: &Grid, t: Transform, occluded: &[bool], bg: u8) -> Option<f64> {
    let dims = g.dims();
    let w = g.width();
    let (mut matching, mut comparable) = (0usize, 0usize);
    for (y, x) in g.positions() {
        let q = t.apply((y, x), dims)?;
        if occluded[y * w + x] || occluded[q.0 * w + q.1] {
            continue;
        }
        let c = g.get(y, x);
        if c == bg {
            continue;
        }
        comparable += 1;
        if g.get(q.0, q.1) == c {
            matching += 1;
        }
    }
    Some(if comparable == 0 { 0.0 } else { matching as f64 / comparable as f64 })
}

fn assess(g: &Grid, region: Vec<Pos>, bg: u8) -> SymmetryAssessment {
    let mut mask = vec![false; g.height() * g.width()];
    for &(y, x) in &region {
        mask[y * g.width() + x] = true;
    }
    let scores: Vec<(Transform, f64)> =
        Transform::ALL.iter().filter_map(|&t| transform_score(g, t, &mask, bg).map(|s| (t, s))).collect();
    let (best_transform, score) = scores
        .iter()
        .copied()
        .fold(None, |acc: Option<(Transform, f64)>, (t, s)| match acc {
            Some((_, b)) if b >= s => acc,
            _ => Some((t, s)),
        })
        .expect("mirrors apply to every shape");
    SymmetryAssessment { score, best_transform, occluded_region: region, scores }
}

/// Best matching fraction of non-background cells under the five grid
/// symmetries. An occlusion candidate is excluded from the comparison only
/// when excluding it raises the score. Ties keep `Transform::ALL` order.
pub fn symmetry_score(g: &Grid) -> SymmetryAssessment {
    let bg = find_background(g);
    let mut best = assess(g, Vec::new(), bg);
    for region in occlusion_candidates(g) {
        let a = assess(g, region, bg);
        if a.score > best.score {
            best = a;
        }
    }
    best
}

/// Fills the occluded region with its images under the best transform; cells
/// whose image is itself occluded fall back to the next best transform.
pub fn solve_symmetry(g: &Grid, assessment: &SymmetryAssessment) -> Result<Grid, SolutionError> {
    if assessment.occluded_region.is_empty() {
        return Err(SolutionError::NoOcclusion);
    }
    let dims = g.dims();
    let w = g.width();
    let mut mask = vec![false; g.height() * w];
    for &(y, x) in &assessment.occluded_region {
        mask[y * w + x] = true;
    }
    let mut order: Vec<(Transform, f64)> = assessment.scores.clone();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    if let Some(i) = order.iter().position(|(t, _)| *t == assessment.best_transform) {
        let best = order.remove(i);
        order.insert(0, best);
    }
    let mut out = g.clone();
    let mut missing = Vec::new();
    for &(y, x) in &assessment.occluded_region {
        let source = order
            .iter()
            .filter_map(|(t, _)| t.apply((y, x), dims))
            .find(|&(qy, qx)| !mask[qy * w + qx]);
        match source {
            Some((qy, qx)) => out.set(y, x, g.get(qy, qx)),
            None => missing.push((y, x)),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(SolutionError::IncompleteRestoration(missing))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vote {
    pub grid: Grid,
    /// Mean over cells of the share of voters agreeing with the winner.
    pub agreement: f64,
    /// Candidates in the modal-dimension group.
    pub voters: usize,
}

/// Cell-wise plurality among the candidates sharing the most common
/// dimensions. Ties, both among dimension groups and among cell values, go to
/// the earliest submission.
pub fn majority_vote(candidates: &[Grid]) -> Result<Vote, SolutionError> {
    if candidates.is_empty() {
        return Err(SolutionError::NoCandidates);
    }
    let mut groups: Vec<((usize, usize), usize)> = Vec::new();
    for c in candidates {
        match groups.iter_mut().find(|(d, _)| *d == c.dims()) {
            Some((_, n)) => *n += 1,
            None => groups.push((c.dims(), 1)),
        }
    }
    let (dims, _) = groups.iter().fold(groups[0], |best, &g| if g.1 > best.1 { g } else { best });
    let voters: Vec<&Grid> = candidates.iter().filter(|c| c.dims() == dims).collect();
    let mut cells = Vec::with_capacity(dims.0 * dims.1);
    let mut agreement = 0.0;
    for i in 0..dims.0 * dims.1 {
        let mut counts = [0usize; 10];
        for v in &voters {
            counts[v.cells()[i] as usize] += 1;
        }
        let top = *counts.iter().max().expect("ten colors");
        let winner = voters.iter().map(|v| v.cells()[i]).find(|&c| counts[c as usize] == top).expect("a voter");
        agreement += top as f64 / voters.len() as f64;
        cells.push(winner);
    }
    let grid = Grid::new(dims.0, dims.1, cells).expect("voted cells are palette colors");
    Ok(Vote { grid, agreement: agreement / (dims.0 * dims.1) as f64, voters: voters.len() })
}

/// External solver endpoint: demonstrations, test input and hint in; one grid
/// out.
pub struct ExternalSolver<'a> {
    pub transport: &'a dyn Transport,
    pub policy: RetryPolicy,
    pub concurrency: usize,
    /// Forwarded so a sampling endpoint can make its draws reproducible.
    pub seed: u64,
}

pub fn solver_request(train: &[Pair], test_input: &Grid, hint: Option<&Hint>, sample: usize, seed: u64) -> Value {
    json!({
        "demonstrations": train,
        "test_input": test_input,
        "hint": hint,
        "sample_index": sample,
        "seed": seed,
    })
}

/// Reads one grid from a response, tolerating text around the outermost
/// list.
pub fn parse_grid_response(body: &str) -> Result<Grid, SolutionError> {
    let start = body.find('[').ok_or_else(|| SolutionError::External("no grid in response".into()))?;
    let end = body.rfind(']').ok_or_else(|| SolutionError::External("no grid in response".into()))?;
    serde_json::from_str(&body[start..=end]).map_err(|e| SolutionError::External(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub candidates: Vec<(Grid, Provenance)>,
    pub final_prediction: Grid,
    pub votes_used: usize,
    pub per_cell_agreement: f64,
    pub low_confidence: bool,
    /// Program behind the final prediction, when there is one.
    #[serde(skip)]
    pub program: Option<Program>,
}

impl SolveResult {
    pub fn provenance(&self) -> Provenance {
        self.candidates[0].1
    }

    fn single(grid: Grid, provenance: Provenance, program: Option<Program>) -> Self {
        Self {
            candidates: vec![(grid.clone(), provenance)],
            final_prediction: grid,
            votes_used: 1,
            per_cell_agreement: 1.0,
            low_confidence: provenance == Provenance::BestEffort,
            program,
        }
    }
}

pub struct SolveContext<'a> {
    pub train: &'a [Pair],
    pub ranked: &'a [RankedPattern],
    pub attempts: usize,
    pub symmetry_threshold: f64,
    pub external: Option<&'a ExternalSolver<'a>>,
}

/// Cells matched across the training pairs by `p`; execution errors score
/// nothing.
fn train_agreement(p: &Program, train: &[Pair]) -> Option<usize> {
    let mut total = 0;
    for pair in train {
        let out = run_program(p, &pair.input).ok()?;
        if out.dims() != pair.output.dims() {
            return None;
        }
        total += out.cells().iter().zip(pair.output.cells()).filter(|(a, b)| a == b).count();
    }
    Some(total)
}

/// Binds the top ranked executable pattern in the test scene and keeps the
/// binding agreeing with the most training cells.
pub fn best_effort(test_input: &Grid, ctx: &SolveContext) -> Option<(Grid, Program)> {
    let scene = abstract_scene(test_input);
    for r in ctx.ranked {
        let cands = instantiate_candidates(std::slice::from_ref(r), &scene, 1, 256);
        let mut best: Option<(usize, Grid, &Program)> = None;
        for p in &cands.programs {
            let Ok(out) = run_program(p, test_input) else { continue };
            let Some(score) = train_agreement(p, ctx.train) else { continue };
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, out, p));
            }
        }
        if let Some((_, g, p)) = best {
            return Some((g, p.clone()));
        }
    }
    None
}

/// Routes a test input through direct execution, symmetry completion,
/// external sampling with voting, and the best-effort guess, in that order.
pub fn solve_task(report: &ConsistencyReport, test_input: &Grid, ctx: &SolveContext) -> Result<SolveResult, SolutionError> {
    if !(3..=10).contains(&ctx.attempts) {
        return Err(SolutionError::AttemptsOutOfRange(ctx.attempts));
    }
    if let Some(p) = &report.selected {
        match solve_direct(p, test_input) {
            Ok(g) => return Ok(SolveResult::single(g, Provenance::ExecutedProgram, Some(p.clone()))),
            Err(e) => log::info!("selected program fails on the test input: {e}"),
        }
    }
    let assessment = symmetry_score(test_input);
    if assessment.score > ctx.symmetry_threshold {
        match solve_symmetry(test_input, &assessment) {
            Ok(g) => return Ok(SolveResult::single(g, Provenance::SymmetrySolver, None)),
            Err(e) => log::info!("symmetry completion skipped: {e}"),
        }
    }
    if let Some(ext) = ctx.external {
        let samples: Vec<usize> = (0..ctx.attempts).collect();
        let replies = run_bounded(&samples, ext.concurrency, |&i| {
            let req = solver_request(ctx.train, test_input, report.hint.as_ref(), i, ext.seed);
            send_with_retry(ext.transport, &req, &ext.policy)
                .map_err(|e: RetriesExhausted| SolutionError::External(e.to_string()))
                .and_then(|body| parse_grid_response(&body))
        });
        let grids: Vec<Grid> = replies
            .into_iter()
            .filter_map(|r| r.map_err(|e| log::warn!("external sample dropped: {e}")).ok())
            .collect();
        if let Ok(vote) = majority_vote(&grids) {
            return Ok(SolveResult {
                candidates: grids.into_iter().map(|g| (g, Provenance::ExternalSolver)).collect(),
                final_prediction: vote.grid,
                votes_used: vote.voters,
                per_cell_agreement: vote.agreement,
                low_confidence: false,
                program: None,
            });
        }
    }
    match best_effort(test_input, ctx) {
        Some((g, p)) => Ok(SolveResult::single(g, Provenance::BestEffort, Some(p))),
        None => Err(SolutionError::Unsolvable),
    }
}
