//! Synthetic tasks with a known generating program, for recovery testing.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::dsl::{Bindings, CompiledStep, Pattern, PatternInstance, Program, Selector};
use crate::grid::{Color, Grid, Pair, TaskRecord};
use crate::hypothesis::vocab::{step_templates, ColorSlot, TargetSlot};
use crate::scene::{abstract_scene, abstract_scene_with_background, SceneGraph, ShapeLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    pub min_train: usize,
    pub max_train: usize,
    pub max_depth: usize,
    /// Program draws before giving up on a palette.
    pub max_tries: usize,
    /// Reject tasks whose demonstrations admit a one-edit alternative that
    /// disagrees on the held-out input.
    pub identifiable: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { min_dim: 6, max_dim: 12, min_train: 2, max_train: 4, max_depth: 2, max_tries: 400, identifiable: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedTask {
    pub task: TaskRecord,
    pub program: Program,
}

const SHAPES: [&[&[u8]]; 11] = [
    &[&[1]],
    &[&[1, 1]],
    &[&[1, 1, 1]],
    &[&[1], &[1], &[1]],
    &[&[1, 1], &[1, 1]],
    &[&[1, 1, 1], &[1, 1, 1]],
    &[&[1, 1, 1], &[1, 0, 1], &[1, 1, 1]],
    &[&[0, 1, 0], &[1, 1, 1], &[0, 1, 0]],
    &[&[1, 0], &[1, 0], &[1, 1]],
    &[&[1, 0, 1], &[1, 0, 1], &[1, 1, 1]],
    &[&[1, 1, 1, 1], &[1, 0, 0, 1], &[1, 0, 0, 1], &[1, 1, 1, 1]],
];

/// Places one object per palette color plus up to two extras on a blank
/// grid. Objects never touch, not even diagonally.
pub fn random_scene_grid<R: Rng>(rng: &mut R, palette: &[Color], config: &SynthConfig) -> Grid {
    loop {
        let h = rng.gen_range(config.min_dim..=config.max_dim);
        let w = rng.gen_range(config.min_dim..=config.max_dim);
        let mut cells = vec![0u8; h * w];
        let mut colors: Vec<Color> = palette.to_vec();
        for _ in 0..rng.gen_range(0..=2) {
            colors.push(*palette.choose(rng).expect("non-empty palette"));
        }
        let mut placed = 0;
        for &c in &colors {
            let shape = SHAPES.choose(rng).expect("shapes");
            let (sh, sw) = (shape.len(), shape[0].len());
            if sh > h || sw > w {
                continue;
            }
            for _ in 0..40 {
                let (y0, x0) = (rng.gen_range(0..=h - sh), rng.gen_range(0..=w - sw));
                let clear = (y0.saturating_sub(1)..(y0 + sh + 1).min(h))
                    .all(|y| (x0.saturating_sub(1)..(x0 + sw + 1).min(w)).all(|x| cells[y * w + x] == 0));
                if clear {
                    for (dy, row) in shape.iter().enumerate() {
                        for (dx, &on) in row.iter().enumerate() {
                            if on == 1 {
                                cells[(y0 + dy) * w + x0 + dx] = c;
                            }
                        }
                    }
                    placed += 1;
                    break;
                }
            }
        }
        let filled = cells.iter().filter(|&&c| c != 0).count();
        if placed == colors.len() && filled * 2 < h * w {
            return Grid::new(h, w, cells).expect("dims within limits");
        }
    }
}

/// A scene-independent selector over `palette`.
pub fn random_selector<R: Rng>(rng: &mut R, palette: &[Color]) -> Selector {
    let mut options = vec![
        Selector::All,
        Selector::Largest,
        Selector::Smallest,
        Selector::Leftmost,
        Selector::Rightmost,
        Selector::Topmost,
        Selector::Bottommost,
    ];
    options.extend(palette.iter().map(|&c| Selector::Color(c)));
    options.extend([ShapeLabel::Cell, ShapeLabel::Square, ShapeLabel::Rectangle, ShapeLabel::Frame].map(Selector::Shape));
    *options.choose(rng).expect("options")
}

/// One executable step drawn from the proposer vocabulary with random bindings.
pub fn random_step<R: Rng>(rng: &mut R, palette: &[Color]) -> PatternInstance {
    let patterns: Vec<Pattern> = Pattern::executable().collect();
    let pattern = *patterns.choose(rng).expect("executable patterns");
    let templates: Vec<_> = step_templates().iter().filter(|t| t.pattern == pattern).collect();
    let t = templates.choose(rng).expect("templates per pattern");
    let mut b = Bindings::source(random_selector(rng, palette));
    match t.target {
        TargetSlot::Required => b.target = Some(random_selector(rng, palette)),
        TargetSlot::Optional if rng.gen_bool(0.5) => b.target = Some(random_selector(rng, palette)),
        _ => {}
    }
    b.color = match t.color {
        ColorSlot::None => None,
        ColorSlot::Painted => Some(rng.gen_range(1..=9)),
        ColorSlot::Present => Some(*palette.choose(rng).expect("palette")),
        ColorSlot::OptionalPainted => rng.gen_bool(0.5).then(|| rng.gen_range(1..=9)),
    };
    t.instance(b)
}

/// Canvases and scenes before each step, plus the final canvas.
struct Trace {
    canvases: Vec<Grid>,
    scenes: Vec<SceneGraph>,
}

impl Trace {
    fn output(&self) -> &Grid {
        self.canvases.last().expect("at least the input")
    }
}

/// Runs `steps` in order, requiring every step to succeed and to change the
/// grid.
fn trace(steps: &[CompiledStep], input: &Grid) -> Option<Trace> {
    let mut scene = abstract_scene(input);
    let bg = scene.background;
    let mut canvases = vec![input.clone()];
    let mut scenes = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        if i > 0 {
            scene = abstract_scene_with_background(canvases.last().expect("non-empty"), bg);
        }
        let next = step.apply(&scene, canvases.last().expect("non-empty")).ok()?;
        if &next == canvases.last().expect("non-empty") {
            return None;
        }
        scenes.push(scene.clone());
        canvases.push(next);
    }
    Some(Trace { canvases, scenes })
}

/// Output of the planted program with step `at` replaced by `step`; with
/// `truncate` the steps after `at` are dropped.
fn variant(planted: &[CompiledStep], t: &Trace, at: usize, step: &CompiledStep, truncate: bool) -> Option<Grid> {
    let bg = t.scenes[0].background;
    let mut out = step.apply(&t.scenes[at], &t.canvases[at]).ok()?;
    if !truncate {
        for later in &planted[at + 1..] {
            let scene = abstract_scene_with_background(&out, bg);
            out = later.apply(&scene, &out).ok()?;
        }
    }
    Some(out)
}

/// Every vocabulary step over the task's selectors and the given colors.
fn neighbourhood(palette: &[Color], colors: &[Color]) -> Vec<(PatternInstance, CompiledStep)> {
    let mut selectors = vec![
        Selector::All,
        Selector::Largest,
        Selector::Smallest,
        Selector::Leftmost,
        Selector::Rightmost,
        Selector::Topmost,
        Selector::Bottommost,
    ];
    selectors.extend(palette.iter().map(|&c| Selector::Color(c)));
    selectors.extend(ShapeLabel::ALL.map(Selector::Shape));
    let mut out = Vec::new();
    for t in step_templates() {
        let targets: Vec<Option<Selector>> = match t.target {
            TargetSlot::None => vec![None],
            TargetSlot::Required => selectors.iter().map(|&s| Some(s)).collect(),
            TargetSlot::Optional => std::iter::once(None).chain(selectors.iter().map(|&s| Some(s))).collect(),
        };
        let fills: Vec<Option<Color>> = match t.color {
            ColorSlot::None => vec![None],
            ColorSlot::Painted => colors.iter().map(|&c| Some(c)).collect(),
            ColorSlot::Present => palette.iter().map(|&c| Some(c)).collect(),
            ColorSlot::OptionalPainted => std::iter::once(None).chain(colors.iter().map(|&c| Some(c))).collect(),
        };
        for &source in &selectors {
            for &target in &targets {
                for &color in &fills {
                    let inst = t.instance(Bindings { source: Some(source), target, color });
                    if let Ok(step) = CompiledStep::new(&inst) {
                        out.push((inst, step));
                    }
                }
            }
        }
    }
    out
}

/// Whether a program one step away from the planted one (a single step
/// swapped, or a single vocabulary step on its own) reproduces every
/// demonstration yet disagrees on the held-out input.
fn under_determined(
    program: &Program,
    planted: &[CompiledStep],
    train: &[Trace],
    test: &Trace,
    vocab: &[(PatternInstance, CompiledStep)],
) -> bool {
    let depth = planted.len();
    let mut edits: Vec<(usize, bool)> = (0..depth).map(|at| (at, false)).collect();
    if depth > 1 {
        edits.push((0, true));
    }
    for &(at, truncate) in &edits {
        for (inst, step) in vocab {
            if !truncate && inst == &program.steps()[at] {
                continue;
            }
            let fits = train.iter().all(|t| variant(planted, t, at, step, truncate).as_ref() == Some(t.output()));
            if fits && variant(planted, test, at, step, truncate).as_ref() != Some(test.output()) {
                return true;
            }
        }
    }
    false
}

/// Draws a task whose outputs are produced by a random program of depth at
/// most `config.max_depth` over the proposer's step vocabulary. Every step
/// must change every grid, and draws are rejected when the demonstrations
/// leave the held-out output under-determined within one edit of the program.
pub fn planted_task<R: Rng>(rng: &mut R, task_id: &str, config: &SynthConfig) -> PlantedTask {
    loop {
        let mut palette: Vec<Color> = (1..=9).collect();
        palette.shuffle(rng);
        palette.truncate(rng.gen_range(2..=3));
        let k = rng.gen_range(config.min_train..=config.max_train);
        let inputs: Vec<Grid> = (0..=k).map(|_| random_scene_grid(rng, &palette, config)).collect();
        for _ in 0..config.max_tries {
            let depth = rng.gen_range(1..=config.max_depth);
            let steps: Vec<PatternInstance> = (0..depth).map(|_| random_step(rng, &palette)).collect();
            let Ok(compiled) = steps.iter().map(CompiledStep::new).collect::<Result<Vec<_>, _>>() else { continue };
            let Some(mut traces) = inputs.iter().map(|g| trace(&compiled, g)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let program = Program::new(steps).expect("depth at least one");
            let test = traces.pop().expect("k + 1 traces");
            let mut colors: Vec<Color> = traces.iter().flat_map(|t| t.output().cells().iter().copied()).collect();
            colors.sort_unstable();
            colors.dedup();
            if config.identifiable
                && under_determined(&program, &compiled, &traces, &test, &neighbourhood(&palette, &colors))
            {
                continue;
            }
            let pairs: Vec<Pair> = traces
                .iter()
                .map(|t| Pair { input: t.canvases[0].clone(), output: t.output().clone() })
                .collect();
            let task = TaskRecord {
                task_id: task_id.to_string(),
                train_pairs: pairs,
                test_inputs: vec![test.canvases[0].clone()],
                test_outputs: Some(vec![test.output().clone()]),
            };
            return PlantedTask { task, program };
        }
    }
}

/// `count` planted tasks; task `i` is drawn from its own generator seeded
/// with `seed + i`, so suites are reproducible and order independent.
pub fn planted_suite(seed: u64, count: usize, config: &SynthConfig) -> Vec<PlantedTask> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = StdRng::seed_from_u64(seed.wrapping_add(i as u64));
            planted_task(&mut rng, &format!("planted-{i:04}"), config)
        })
        .collect()
}
