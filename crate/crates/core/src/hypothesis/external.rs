//! Adapter for an external pattern detector speaking the JSON detection
//! array format.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{Detection, DetectionSource, HypothesisError};
use crate::dsl::{lookup, registry};
use crate::grid::Grid;
use crate::scene::SceneGraph;
use crate::transport::{send_with_retry, RetryPolicy, Transport};

/// The request body: both grids, their object lists and every pattern schema.
pub fn detection_request(input: &Grid, output: &Grid, input_scene: &SceneGraph, output_scene: &SceneGraph) -> Value {
    json!({
        "input_grid": input,
        "output_grid": output,
        "input_objects": input_scene.to_json()["objects"],
        "output_objects": output_scene.to_json()["objects"],
        "patterns": registry(),
    })
}

/// Asks the endpoint for detections on one pair. Malformed entries are
/// dropped with a logged warning.
pub fn propose_external(
    (input, output): (&Grid, &Grid),
    (input_scene, output_scene): (&SceneGraph, &SceneGraph),
    transport: &dyn Transport,
    policy: &RetryPolicy,
) -> Result<Vec<Detection>, HypothesisError> {
    let request = detection_request(input, output, input_scene, output_scene);
    let body = send_with_retry(transport, &request, policy).map_err(HypothesisError::TransportFailure)?;
    let (detections, warnings) = parse_detections(&body)?;
    for w in &warnings {
        log::warn!("dropped detection entry: {w}");
    }
    Ok(detections)
}

/// Extracts the outermost JSON array from `body`, tolerating surrounding
/// prose or code fences.
fn array_slice(body: &str) -> Option<&str> {
    let start = body.find('[')?;
    let end = body.rfind(']')?;
    (end > start).then(|| &body[start..=end])
}

fn param_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> =
                items.iter().map(|i| i.as_str().map(|s| format!("\"{s}\""))).collect();
            Some(format!("[{}]", parts?.join(", ")))
        }
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn parse_entry(i: usize, entry: &Value) -> Result<Detection, String> {
    let obj = entry.as_object().ok_or_else(|| format!("entry {i} is not an object"))?;
    let name = obj
        .get("pattern_name")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("entry {i} has no pattern_name"))?;
    let schema = lookup(name).ok_or_else(|| format!("entry {i} names unknown pattern {name:?}"))?;
    let detected = match obj.get("pattern_detected") {
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) if s.eq_ignore_ascii_case("true") => true,
        Some(Value::String(s)) if s.eq_ignore_ascii_case("false") => false,
        _ => return Err(format!("entry {i} ({name}) has no boolean pattern_detected")),
    };
    let empty = Map::new();
    let raw = match obj.get("params") {
        None | Some(Value::Null) => &empty,
        Some(Value::Object(m)) => m,
        Some(_) => return Err(format!("entry {i} ({name}) has non-object params")),
    };
    let mut params = BTreeMap::new();
    for (k, v) in raw {
        let Some(text) = param_text(v) else {
            return Err(format!("entry {i} ({name}) parameter {k} is not text"));
        };
        if detected {
            match schema.param(k) {
                Some(spec) if spec.allows(&text) => {}
                _ => return Err(format!("entry {i} ({name}) has illegal {k}={text:?}")),
            }
        }
        params.insert(k.clone(), text);
    }
    let reason = obj.get("reason").and_then(Value::as_str).unwrap_or_default().to_string();
    Ok(Detection {
        pattern_name: schema.name.to_string(),
        params,
        detected,
        reason,
        source: DetectionSource::External,
        evidence: Vec::new(),
    })
}

/// Parses a response body into detections plus one warning per dropped entry.
pub fn parse_detections(body: &str) -> Result<(Vec<Detection>, Vec<String>), HypothesisError> {
    if body.trim().is_empty() {
        return Err(HypothesisError::EmptyResponse);
    }
    let slice = array_slice(body).ok_or_else(|| HypothesisError::MalformedResponse("no JSON array".into()))?;
    let value: Value =
        serde_json::from_str(slice).map_err(|e| HypothesisError::MalformedResponse(e.to_string()))?;
    let entries = value.as_array().expect("array slice parses to an array");
    let mut detections = Vec::new();
    let mut warnings = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        match parse_entry(i, entry) {
            Ok(d) => detections.push(d),
            Err(w) => warnings.push(w),
        }
    }
    Ok((detections, warnings))
}
