//! Cross-example filtering: keep the candidates that reproduce every training
//! pair, pick the shortest, or summarize the detections as a hint.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dsl::{run_program, Program};
use crate::grid::{grids_equal, Pair};
use crate::hypothesis::{CandidateSet, RankedPattern};
use crate::scene::SceneGraph;

/// Stable identity of a program: steps in order, parameters by key, bindings
/// by role.
pub fn canonical_id(p: &Program) -> String {
    p.canonical()
}

/// Whether `p` maps the pair's input exactly onto its output. Execution
/// errors count as a mismatch and are logged.
pub fn validates(p: &Program, pair: &Pair) -> bool {
    match run_program(p, &pair.input) {
        Ok(out) => grids_equal(&out, &pair.output),
        Err(e) => {
            log::debug!("{} fails: {e}", canonical_id(p));
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HintPattern {
    pub pattern_name: String,
    pub params: BTreeMap<String, String>,
    pub detection_count: usize,
}

/// Structured summary handed to a downstream solver when no program survives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hint {
    pub ranked_patterns: Vec<HintPattern>,
    pub scene_summary: Value,
    pub consensus_notes: Vec<String>,
}

/// What the hint is built from.
#[derive(Debug, Clone, Copy)]
pub struct HintContext<'a> {
    pub ranked: &'a [RankedPattern],
    /// Number of detection runs the counts were taken over.
    pub runs: usize,
    pub test_scene: Option<&'a SceneGraph>,
}

fn scene_digest(scene: &SceneGraph) -> Value {
    let objects: Vec<Value> = scene
        .objects
        .iter()
        .map(|o| {
            json!({
                "id": o.object_id,
                "color": o.dominant_color(),
                "size": o.size(),
                "shape": o.shape_label,
                "bbox": [o.bbox.y_min, o.bbox.x_min, o.bbox.y_max, o.bbox.x_max],
                "cavities": o.cavities.len(),
            })
        })
        .collect();
    json!({
        "background": scene.background,
        "dims": [scene.source_dims.0, scene.source_dims.1],
        "object_count": scene.objects.len(),
        "objects": objects,
    })
}

pub fn build_hint(ctx: &HintContext) -> Hint {
    let ranked_patterns = ctx
        .ranked
        .iter()
        .map(|r| HintPattern { pattern_name: r.pattern_name.clone(), params: r.params.clone(), detection_count: r.count })
        .collect();
    let consensus_notes = ctx
        .ranked
        .iter()
        .map(|r| format!("{}: detected in {} of {} runs", r.pattern_name, r.count, ctx.runs))
        .collect();
    Hint {
        ranked_patterns,
        scene_summary: ctx.test_scene.map_or(Value::Null, scene_digest),
        consensus_notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// Ids of the candidates valid on each example, in enumeration order.
    pub per_example_valid: Vec<Vec<String>>,
    /// Ids valid on every example, in the first example's enumeration order.
    pub surviving: Vec<String>,
    #[serde(skip)]
    pub survivors: Vec<Program>,
    pub selected: Option<Program>,
    pub selection_rationale: Option<String>,
    pub hint: Option<Hint>,
}

impl ConsistencyReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report is plain data")
    }
}

/// Validates each example's candidates on that example, intersects the valid
/// sets by canonical id and selects the shallowest survivor (first in
/// enumeration order on ties). Without survivors the report carries a hint.
pub fn filter_consistent(sets: &[CandidateSet], pairs: &[Pair], hint: &HintContext) -> ConsistencyReport {
    assert_eq!(sets.len(), pairs.len(), "one candidate set per training pair");
    let per_example: Vec<Vec<(String, &Program)>> = sets
        .iter()
        .zip(pairs)
        .map(|(set, pair)| {
            let verdicts: Vec<bool> = set.candidates.par_iter().map(|p| validates(p, pair)).collect();
            set.candidates
                .iter()
                .zip(verdicts)
                .filter(|(_, ok)| *ok)
                .map(|(p, _)| (canonical_id(p), p))
                .collect()
        })
        .collect();
    let id_sets: Vec<BTreeSet<&str>> =
        per_example.iter().map(|v| v.iter().map(|(id, _)| id.as_str()).collect()).collect();
    let (surviving, survivors): (Vec<String>, Vec<Program>) = match per_example.first() {
        None => (Vec::new(), Vec::new()),
        Some(first) => first
            .iter()
            .filter(|(id, _)| id_sets.iter().all(|s| s.contains(id.as_str())))
            .map(|(id, p)| (id.clone(), (*p).clone()))
            .unzip(),
    };
    debug_assert!(survivors.iter().all(|p| pairs.iter().all(|pair| validates(p, pair))));
    let selected = survivors.iter().min_by_key(|p| p.depth()).cloned();
    let selection_rationale = selected.as_ref().map(|p| {
        format!("shallowest of {} surviving program(s), depth {}", survivors.len(), p.depth())
    });
    let hint = selected.is_none().then(|| build_hint(hint));
    ConsistencyReport {
        per_example_valid: per_example.into_iter().map(|v| v.into_iter().map(|(id, _)| id).collect()).collect(),
        surviving,
        survivors,
        selected,
        selection_rationale,
        hint,
    }
}
