//! Deterministic proposer: explains an input/output pair by searching the
//! step vocabulary for programs that reproduce the output exactly.

use std::collections::{BTreeSet, HashMap};

use super::vocab::{selector_groups, step_templates, ColorSlot, SelectorGroup, StepTemplate, TargetSlot};
use super::{Detection, DetectionSource};
use crate::dsl::{Bindings, CompiledStep, PatternInstance, Program, Selector};
use crate::grid::{render, Color, Grid};
use crate::scene::{abstract_scene_with_background, SceneGraph};

/// When two-step explanations are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeepSearch {
    /// Only if no single step explains the pair.
    WhenShallowFails,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProposerConfig {
    pub max_depth: usize,
    /// Distinct first-step results expanded at depth two.
    pub beam_width: usize,
    /// Beam entries whose first step uses the same pattern.
    pub per_pattern: usize,
    pub deep_search: DeepSearch,
    /// Cap on explanation programs kept per pair.
    pub max_evidence: usize,
}

impl Default for ProposerConfig {
    fn default() -> Self {
        Self { max_depth: 2, beam_width: 24, per_pattern: 4, deep_search: DeepSearch::WhenShallowFails, max_evidence: 4096 }
    }
}

/// A template with bindings chosen by group index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct StepRef {
    template: usize,
    source: usize,
    target: Option<usize>,
    color: Option<Color>,
}

/// One scene's vocabulary, with selector groups and color pools resolved.
struct Frame<'a> {
    scene: &'a SceneGraph,
    canvas: &'a Grid,
    groups: Vec<SelectorGroup>,
    painted: Vec<Color>,
    present: Vec<Color>,
}

impl<'a> Frame<'a> {
    fn new(scene: &'a SceneGraph, canvas: &'a Grid, goal: &Grid) -> Self {
        let mut painted = BTreeSet::new();
        for (&a, &b) in canvas.cells().iter().zip(goal.cells()) {
            if a != b {
                painted.insert(b);
            }
        }
        let mut present: BTreeSet<Color> = canvas.cells().iter().copied().collect();
        present.remove(&scene.background);
        Self {
            scene,
            canvas,
            groups: selector_groups(scene),
            painted: painted.into_iter().collect(),
            present: present.into_iter().collect(),
        }
    }

    fn colors(&self, slot: ColorSlot) -> Vec<Option<Color>> {
        match slot {
            ColorSlot::None => vec![None],
            ColorSlot::Painted => self.painted.iter().map(|&c| Some(c)).collect(),
            ColorSlot::Present => self.present.iter().map(|&c| Some(c)).collect(),
            ColorSlot::OptionalPainted => {
                std::iter::once(None).chain(self.painted.iter().map(|&c| Some(c))).collect()
            }
        }
    }

    fn bindings(&self, r: &StepRef) -> Bindings {
        let mut b = Bindings::source(self.groups[r.source].selectors[0]);
        if let Some(t) = r.target {
            b = b.with_target(self.groups[t].selectors[0]);
        }
        if let Some(c) = r.color {
            b = b.with_color(c);
        }
        b
    }

    /// Executes every step of the vocabulary once per selector group and
    /// hands each successful result to `visit`.
    fn for_each_step(&self, mut visit: impl FnMut(StepRef, Grid)) {
        let templates = step_templates();
        let n = self.groups.len();
        for (ti, t) in templates.iter().enumerate() {
            let targets: Vec<Option<usize>> = match t.target {
                TargetSlot::None => vec![None],
                TargetSlot::Required => (0..n).map(Some).collect(),
                TargetSlot::Optional => std::iter::once(None).chain((0..n).map(Some)).collect(),
            };
            for color in self.colors(t.color) {
                for source in 0..n {
                    for &target in &targets {
                        let r = StepRef { template: ti, source, target, color };
                        let Ok(step) = CompiledStep::new(&t.instance(self.bindings(&r))) else { continue };
                        if let Ok(out) = step.apply(self.scene, self.canvas) {
                            visit(r, out);
                        }
                    }
                }
            }
        }
    }

    /// Every vocabulary spelling of a step, source aliases first.
    fn spellings(&self, r: &StepRef) -> Vec<PatternInstance> {
        let t: &StepTemplate = &step_templates()[r.template];
        let targets: Vec<Option<Selector>> = match r.target {
            None => vec![None],
            Some(g) => self.groups[g].selectors.iter().map(|&s| Some(s)).collect(),
        };
        let mut out = Vec::new();
        for &s in &self.groups[r.source].selectors {
            for &tg in &targets {
                let mut b = Bindings::source(s);
                b.target = tg;
                b.color = r.color;
                out.push(t.instance(b));
            }
        }
        out
    }
}

fn changed_cells(a: &Grid, b: &Grid) -> Vec<bool> {
    a.cells().iter().zip(b.cells()).map(|(x, y)| x != y).collect()
}

/// Ranks a first step by how much of the remaining difference it settles.
fn progress(input: &Grid, mid: &Grid, goal: &Grid, diff: &[bool]) -> i64 {
    let mut score = 0i64;
    for i in 0..diff.len() {
        let (a, m, g) = (input.cells()[i], mid.cells()[i], goal.cells()[i]);
        if a == m {
            continue;
        }
        if !diff[i] {
            score -= 2;
        } else {
            score += 1;
            if m == g {
                score += 1;
            }
        }
    }
    score
}

struct Evidence {
    programs: Vec<Program>,
    seen: BTreeSet<String>,
    cap: usize,
}

impl Evidence {
    fn push(&mut self, p: Program) {
        if self.programs.len() < self.cap && self.seen.insert(p.canonical()) {
            self.programs.push(p);
        }
    }
}

/// Explains one training pair. Emits one detection per pattern that occurs in
/// some program reproducing the output; identical grids yield nothing.
pub fn propose_builtin(input_scene: &SceneGraph, output_scene: &SceneGraph) -> Vec<Detection> {
    propose_builtin_with(input_scene, output_scene, &ProposerConfig::default())
}

pub fn propose_builtin_with(
    input_scene: &SceneGraph,
    output_scene: &SceneGraph,
    config: &ProposerConfig,
) -> Vec<Detection> {
    let (h, w) = input_scene.source_dims;
    if output_scene.source_dims != (h, w) {
        return Vec::new();
    }
    let (Ok(input), Ok(output)) = (render(input_scene, h, w), render(output_scene, h, w)) else {
        return Vec::new();
    };
    if input == output || config.max_depth == 0 {
        return Vec::new();
    }
    let programs = explain(input_scene, &input, &output, config);
    detections_from(programs)
}

fn explain(scene: &SceneGraph, input: &Grid, output: &Grid, config: &ProposerConfig) -> Vec<Program> {
    let mut evidence = Evidence { programs: Vec::new(), seen: BTreeSet::new(), cap: config.max_evidence };
    let frame = Frame::new(scene, input, output);
    let diff = changed_cells(input, output);
    let mut hits = Vec::new();
    let mut mids: Vec<(Grid, Vec<StepRef>)> = Vec::new();
    let mut mid_index: HashMap<Grid, usize> = HashMap::new();
    frame.for_each_step(|r, out| {
        if out == *output {
            hits.push(r);
        } else if out != *input && config.max_depth >= 2 {
            match mid_index.get(&out) {
                Some(&i) => mids[i].1.push(r),
                None => {
                    mid_index.insert(out.clone(), mids.len());
                    mids.push((out, vec![r]));
                }
            }
        }
    });
    for r in &hits {
        for inst in frame.spellings(r) {
            evidence.push(Program::single(inst));
        }
    }
    let go_deep = config.max_depth >= 2 && (hits.is_empty() || config.deep_search == DeepSearch::Always);
    if go_deep {
        let mut ranked: Vec<(i64, usize)> = mids
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (progress(input, g, output, &diff), i))
            .filter(|&(s, _)| s > 0)
            .collect();
        ranked.sort_by_key(|&(s, i)| (std::cmp::Reverse(s), i));
        let templates = step_templates();
        let mut per_pattern: HashMap<_, usize> = HashMap::new();
        let beam = ranked
            .iter()
            .filter(|&&(_, i)| {
                let n = per_pattern.entry(templates[mids[i].1[0].template].pattern).or_default();
                *n += 1;
                *n <= config.per_pattern
            })
            .take(config.beam_width);
        for &(_, i) in beam {
            let (mid, firsts) = &mids[i];
            let mid_scene = abstract_scene_with_background(mid, scene.background);
            let second = Frame::new(&mid_scene, mid, output);
            let mut finals = Vec::new();
            second.for_each_step(|r, out| {
                if out == *output {
                    finals.push(r);
                }
            });
            for f in firsts {
                for a in frame.spellings(f) {
                    for r in &finals {
                        for b in second.spellings(r) {
                            evidence.push(Program::new(vec![a.clone(), b]).expect("two steps"));
                        }
                    }
                }
            }
        }
    }
    evidence.programs
}

fn detections_from(programs: Vec<Program>) -> Vec<Detection> {
    let mut by_pattern: Vec<(usize, Detection)> = Vec::new();
    for p in &programs {
        for step in p.steps() {
            let schema = step.schema().expect("vocabulary patterns are registered");
            let idx = schema.pattern.index();
            match by_pattern.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, d)) => {
                    if d.evidence.last() != Some(p) {
                        d.evidence.push(p.clone());
                    }
                }
                None => by_pattern.push((
                    idx,
                    Detection {
                        pattern_name: schema.name.to_string(),
                        params: step.params.clone(),
                        detected: true,
                        reason: String::new(),
                        source: DetectionSource::Builtin,
                        evidence: vec![p.clone()],
                    },
                )),
            }
        }
    }
    by_pattern.sort_by_key(|(i, _)| *i);
    by_pattern
        .into_iter()
        .map(|(_, mut d)| {
            let shortest = d.evidence.iter().map(Program::depth).min().unwrap_or(0);
            d.reason = format!(
                "{} program(s) reproduce the output, shortest has {} step(s): {}",
                d.evidence.len(),
                shortest,
                d.evidence[0].canonical()
            );
            d
        })
        .collect()
}
