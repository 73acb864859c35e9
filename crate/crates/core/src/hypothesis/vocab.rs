//! The finite step vocabulary searched by the builtin proposer and sampled by
//! the synthetic task generator.
//!
//! Only parameters that change execution are set; descriptive parameters are
//! left unset so that identical behavior has one spelling.

use std::sync::OnceLock;

use crate::dsl::{required_roles, Bindings, Pattern, PatternInstance, Role, Selector};
use crate::scene::{SceneGraph, ShapeLabel};

/// Where a template's color binding is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSlot {
    None,
    /// A color the step paints.
    Painted,
    /// A color already present in the input (stop colors).
    Present,
    /// Either no binding or a painted color.
    OptionalPainted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSlot {
    None,
    Required,
    Optional,
}

/// One operative parameterization of an executable pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTemplate {
    pub pattern: Pattern,
    pub params: Vec<(&'static str, &'static str)>,
    pub color: ColorSlot,
    pub target: TargetSlot,
}

impl StepTemplate {
    pub fn instance(&self, bindings: Bindings) -> PatternInstance {
        let mut inst = PatternInstance::new(self.pattern.name()).bind(bindings);
        for &(k, v) in &self.params {
            inst = inst.param(k, v);
        }
        inst
    }
}

fn values(p: Pattern, name: &str) -> &'static [&'static str] {
    p.schema().param(name).unwrap_or_else(|| panic!("{} has no parameter {name}", p.name())).values
}

fn product(p: Pattern, names: &[&'static str]) -> Vec<Vec<(&'static str, &'static str)>> {
    let mut out = vec![Vec::new()];
    for &name in names {
        let vals = values(p, name);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push((name, v));
                    next
                })
            })
            .collect();
    }
    out
}

fn operative(p: Pattern) -> Vec<Vec<(&'static str, &'static str)>> {
    match p {
        Pattern::HorizontalFill => product(p, &["column_index", "stop_condition", "fill_color"]),
        Pattern::VerticalFill => product(p, &["row_index", "stop_condition"]),
        Pattern::ConnectingBridges => product(p, &["bridge_color", "path_direction"]),
        Pattern::BoundaryAttachmentFill => {
            let mut out = vec![vec![("fill_logic", "fits in space to form rectangle")]];
            for &side in values(p, "attachment_direction") {
                out.push(vec![("fill_logic", "gets laid on the object"), ("attachment_direction", side)]);
            }
            out
        }
        Pattern::DiagonalFill => product(p, &["direction", "fill_color", "stop_condition"]),
        Pattern::FindAndColor => product(p, &["new_color"]),
        Pattern::RemoveInSequence => product(p, &["removal_method"]),
        Pattern::AlternatingFill => product(p, &["colors", "pattern_type", "internal_sequence_spacing"]),
        Pattern::CavityFill => product(p, &["max_indent_depth", "fill_color"]),
        Pattern::AddReplace => product(p, &["add_replacement_object", "inherit_properties", "additional_change"]),
        Pattern::FallingDown => vec![Vec::new()],
        Pattern::TranslationToGoal => product(p, &["step_count_or_speed"]),
        Pattern::Symmetry => product(p, &["symmetry_type", "copy_mode"]),
        Pattern::RayCast => product(p, &["ray_source", "direction", "stop_condition", "mark_color"]),
        _ => Vec::new(),
    }
}

fn build_templates() -> Vec<StepTemplate> {
    let mut out = Vec::new();
    for p in Pattern::executable() {
        for params in operative(p) {
            let mut t = StepTemplate { pattern: p, params, color: ColorSlot::None, target: TargetSlot::None };
            let probe = t.instance(Bindings::source(Selector::All));
            let roles = required_roles(&probe, p.schema());
            if roles.contains(&Role::Target) {
                t.target = TargetSlot::Required;
            } else if p == Pattern::Symmetry {
                t.target = TargetSlot::Optional;
            }
            t.color = if roles.contains(&Role::Color) {
                if t.params.iter().any(|&(_, v)| v == "specific color") {
                    ColorSlot::Present
                } else {
                    ColorSlot::Painted
                }
            } else if p == Pattern::BoundaryAttachmentFill {
                ColorSlot::OptionalPainted
            } else {
                ColorSlot::None
            };
            out.push(t);
        }
    }
    out
}

/// Every template, grouped by pattern in library order.
pub fn step_templates() -> &'static [StepTemplate] {
    static TEMPLATES: OnceLock<Vec<StepTemplate>> = OnceLock::new();
    TEMPLATES.get_or_init(build_templates)
}

/// Scene-relative selectors in preference order. Id selectors are excluded
/// because they do not transfer between scenes.
pub fn selector_vocabulary(scene: &SceneGraph) -> Vec<Selector> {
    let mut out = vec![
        Selector::All,
        Selector::Largest,
        Selector::Smallest,
        Selector::Leftmost,
        Selector::Rightmost,
        Selector::Topmost,
        Selector::Bottommost,
    ];
    let mut colors: Vec<u8> = scene.objects.iter().map(|o| o.dominant_color()).collect();
    colors.sort_unstable();
    colors.dedup();
    out.extend(colors.into_iter().map(Selector::Color));
    for label in ShapeLabel::ALL {
        if scene.objects.iter().any(|o| o.shape_label == label) {
            out.push(Selector::Shape(label));
        }
    }
    out
}

/// A set of objects and every vocabulary selector resolving to exactly it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorGroup {
    pub objects: Vec<usize>,
    pub selectors: Vec<Selector>,
}

/// Groups the vocabulary by resolution, dropping selectors that match
/// nothing. Groups appear in order of their first selector.
pub fn selector_groups(scene: &SceneGraph) -> Vec<SelectorGroup> {
    let mut groups: Vec<SelectorGroup> = Vec::new();
    for sel in selector_vocabulary(scene) {
        let objects = sel.resolve(scene);
        if objects.is_empty() {
            continue;
        }
        match groups.iter_mut().find(|g| g.objects == objects) {
            Some(g) => g.selectors.push(sel),
            None => groups.push(SelectorGroup { objects, selectors: vec![sel] }),
        }
    }
    groups
}
