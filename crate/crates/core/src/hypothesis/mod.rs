//! Candidate generation: per-pair pattern detections, their aggregation into
//! a ranked list, and instantiation of ranked patterns as bound programs.

mod builtin;
mod external;
pub mod vocab;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{lookup, registry, required_roles, Bindings, PatternInstance, Program, Role, Selector};
use crate::scene::SceneGraph;
use crate::transport::RetriesExhausted;

pub use builtin::{propose_builtin, propose_builtin_with, DeepSearch, ProposerConfig};
pub use external::{detection_request, parse_detections, propose_external};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypothesisError {
    #[error("transport failure: {0}")]
    TransportFailure(RetriesExhausted),
    #[error("empty response from detector")]
    EmptyResponse,
    #[error("malformed detector response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSource {
    Builtin,
    External,
}

/// One pattern verdict for one training pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub pattern_name: String,
    pub params: BTreeMap<String, String>,
    pub detected: bool,
    pub reason: String,
    pub source: DetectionSource,
    /// Programs verified to reproduce the pair (builtin detections only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Program>,
}

/// A pattern that survived top-k filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedPattern {
    pub pattern_name: String,
    pub params: BTreeMap<String, String>,
    pub count: usize,
    #[serde(skip)]
    pub evidence: Vec<Program>,
}

fn registry_index(name: &str) -> usize {
    lookup(name).map_or(usize::MAX, |s| s.pattern.index())
}

/// Orders parameter maps by enum position, parameter by parameter in schema
/// order; unset parameters count as the first value.
fn enum_key(name: &str, params: &BTreeMap<String, String>) -> Vec<usize> {
    let Some(schema) = lookup(name) else { return Vec::new() };
    schema
        .parameters
        .iter()
        .map(|spec| params.get(spec.name).and_then(|v| spec.values.iter().position(|x| x == v)).unwrap_or(0))
        .collect()
}

/// Counts `detected` verdicts per pattern (at most once per run), keeps the
/// `k_top` most frequent with ties going to library order, and attaches the
/// modal parameter map and merged evidence of each.
pub fn aggregate_detections(runs: &[Vec<Detection>], k_top: usize) -> Vec<RankedPattern> {
    struct Tally<'a> {
        count: usize,
        maps: Vec<(&'a BTreeMap<String, String>, usize)>,
        evidence: Vec<Program>,
        seen: BTreeSet<String>,
    }
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    for run in runs {
        let mut counted: BTreeSet<&str> = BTreeSet::new();
        for d in run.iter().filter(|d| d.detected) {
            let t = tallies.entry(d.pattern_name.as_str()).or_insert_with(|| Tally {
                count: 0,
                maps: Vec::new(),
                evidence: Vec::new(),
                seen: BTreeSet::new(),
            });
            if counted.insert(d.pattern_name.as_str()) {
                t.count += 1;
            }
            match t.maps.iter_mut().find(|(m, _)| *m == &d.params) {
                Some((_, n)) => *n += 1,
                None => t.maps.push((&d.params, 1)),
            }
            for p in &d.evidence {
                if t.seen.insert(p.canonical()) {
                    t.evidence.push(p.clone());
                }
            }
        }
    }
    let mut ranked: Vec<RankedPattern> = tallies
        .into_iter()
        .map(|(name, t)| {
            let best = t
                .maps
                .iter()
                .enumerate()
                .min_by_key(|(i, (m, n))| (std::cmp::Reverse(*n), enum_key(name, m), *i))
                .map(|(_, (m, _))| (*m).clone())
                .unwrap_or_default();
            RankedPattern { pattern_name: name.to_string(), params: best, count: t.count, evidence: t.evidence }
        })
        .collect();
    ranked.sort_by_key(|r| (std::cmp::Reverse(r.count), registry_index(&r.pattern_name)));
    ranked.truncate(k_top);
    ranked
}

/// Candidate programs for one training example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub example_index: usize,
    pub candidates: Vec<Program>,
    pub detection_counts: BTreeMap<String, usize>,
    pub budget_exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instantiation {
    pub programs: Vec<Program>,
    /// The enumeration stopped at the budget; `programs` is a prefix.
    pub budget_exceeded: bool,
    /// No ranked pattern is executable, so only a hint can be produced.
    pub hint_only: bool,
}

pub const DEFAULT_BUDGET: usize = 10_000;

/// Bound single steps for a pattern without evidence: its modal parameters
/// under every resolvable selector and, where needed, target and color.
fn generic_steps(entry: &RankedPattern, scene: &SceneGraph) -> Vec<PatternInstance> {
    let mut base = PatternInstance::new(entry.pattern_name.clone());
    base.params = entry.params.clone();
    let Some(schema) = base.schema() else { return Vec::new() };
    let roles = required_roles(&base, schema);
    let selectors: Vec<Selector> =
        vocab::selector_vocabulary(scene).into_iter().filter(|s| !s.resolve(scene).is_empty()).collect();
    let targets: Vec<Option<Selector>> = if roles.contains(&Role::Target) {
        selectors.iter().map(|&s| Some(s)).collect()
    } else if schema.name == "Symmetry-Based Pattern" {
        std::iter::once(None).chain(selectors.iter().map(|&s| Some(s))).collect()
    } else {
        vec![None]
    };
    let colors: Vec<Option<u8>> =
        if roles.contains(&Role::Color) { (0..=9).map(Some).collect() } else { vec![None] };
    let mut out = Vec::new();
    for &s in &selectors {
        for &t in &targets {
            for &c in &colors {
                out.push(base.clone().bind(Bindings { source: Some(s), target: t, color: c }));
            }
        }
    }
    out
}

/// Enumerates programs of depth at most `max_depth` over the executable
/// ranked patterns: shallower programs first, then ranked-pattern order, then
/// binding order. Patterns with evidence contribute their verified programs;
/// others are bound generically in `scene`.
pub fn instantiate_candidates(
    ranked: &[RankedPattern],
    scene: &SceneGraph,
    max_depth: usize,
    budget: usize,
) -> Instantiation {
    let executable: Vec<&RankedPattern> = ranked
        .iter()
        .filter(|r| lookup(&r.pattern_name).is_some_and(|s| s.executable))
        .collect();
    if executable.is_empty() {
        return Instantiation { hint_only: true, ..Default::default() };
    }
    let rank_of = |name: &str| executable.iter().position(|r| r.pattern_name == name);
    let all_evidence: Vec<&Program> = {
        let mut seen = BTreeSet::new();
        executable.iter().flat_map(|r| &r.evidence).filter(|p| seen.insert(p.canonical())).collect()
    };
    let steps: Vec<Vec<PatternInstance>> = executable
        .iter()
        .map(|r| {
            if r.evidence.is_empty() {
                generic_steps(r, scene)
            } else {
                Vec::new()
            }
        })
        .collect();

    let mut out = Instantiation::default();
    let mut seen = BTreeSet::new();
    let mut push = |p: Program, out: &mut Instantiation| -> bool {
        if out.programs.len() >= budget {
            out.budget_exceeded = true;
            return false;
        }
        if seen.insert(p.canonical()) {
            out.programs.push(p);
        }
        true
    };

    for depth in 1..=max_depth.min(2) {
        let ranks: Vec<Vec<usize>> = if depth == 1 {
            (0..executable.len()).map(|a| vec![a]).collect()
        } else {
            (0..executable.len()).flat_map(|a| (0..executable.len()).map(move |b| vec![a, b])).collect()
        };
        for combo in ranks {
            for p in all_evidence.iter().filter(|p| {
                p.depth() == depth
                    && p.steps().iter().zip(&combo).all(|(s, &r)| rank_of(&s.pattern_name) == Some(r))
            }) {
                if !push((*p).clone(), &mut out) {
                    return out;
                }
            }
            if combo.iter().all(|&r| executable[r].evidence.is_empty()) {
                let lists: Vec<&Vec<PatternInstance>> = combo.iter().map(|&r| &steps[r]).collect();
                if depth == 1 {
                    for s in lists[0] {
                        if !push(Program::single(s.clone()), &mut out) {
                            return out;
                        }
                    }
                } else {
                    for a in lists[0] {
                        for b in lists[1] {
                            let p = Program::new(vec![a.clone(), b.clone()]).expect("two steps");
                            if !push(p, &mut out) {
                                return out;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Detection counts per pattern name over `runs` (at most one per run).
pub fn detection_counts(runs: &[Vec<Detection>]) -> BTreeMap<String, usize> {
    aggregate_detections(runs, registry().len())
        .into_iter()
        .map(|r| (r.pattern_name, r.count))
        .collect()
}
