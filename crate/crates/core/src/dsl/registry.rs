//! The 22 unit patterns and their parameter vocabularies.

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

/// Binding roles a pattern may need besides its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Source,
    Target,
    Color,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Source => "source",
            Role::Target => "target",
            Role::Color => "color",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    HorizontalFill,
    VerticalFill,
    ConnectingBridges,
    BoundaryAttachmentFill,
    DiagonalFill,
    PatternMatchingFillRemove,
    CreatingPatterns,
    FindAndColor,
    RemoveInSequence,
    Rearrange,
    AlternatingFill,
    TranslationByEnvironment,
    CavityFill,
    AddReplace,
    FallingDown,
    AttachToSimilar,
    TranslationToGoal,
    ObjectDismantles,
    Symmetry,
    RayCast,
    Scattering,
    SmallObjectPatterns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub values: &'static [&'static str],
}

impl ParamSpec {
    pub fn allows(&self, value: &str) -> bool {
        self.values.contains(&value)
    }
}

impl Serialize for ParamSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ParamSpec", 2)?;
        s.serialize_field("name", self.name)?;
        s.serialize_field("values", self.values)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternSchema {
    pub pattern: Pattern,
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: &'static [ParamSpec],
    pub executable: bool,
    /// Roles every executable instance must bind.
    pub roles: &'static [Role],
}

impl PatternSchema {
    pub fn param(&self, name: &str) -> Option<&'static ParamSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

impl Serialize for PatternSchema {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PatternSchema", 3)?;
        s.serialize_field("name", self.name)?;
        s.serialize_field("description", self.description)?;
        s.serialize_field("parameters", self.parameters)?;
        s.end()
    }
}

macro_rules! params {
    ($($name:literal : [$($v:literal),* $(,)?]),* $(,)?) => {
        &[$(ParamSpec { name: $name, values: &[$($v),*] }),*]
    };
}

const SHAPES_4: [&str; 4] = ["line", "square", "rectangle", "cavity"];

static REGISTRY: [PatternSchema; 22] = [
    PatternSchema {
        pattern: Pattern::HorizontalFill,
        name: "Horizontal Fill",
        description: "Extend or fill an object horizontally across contiguous empty or target cells.",
        parameters: &[
            ParamSpec { name: "source_object", values: &SHAPES_4 },
            ParamSpec { name: "column_index", values: &["left of an object", "right of an object"] },
            ParamSpec { name: "fill_color", values: &["based on source", "based on some different objects"] },
            ParamSpec { name: "sequence", values: &["based on source width", "based on source height"] },
            ParamSpec { name: "stop_condition", values: &["another object", "grid boundary", "specific color"] },
            ParamSpec { name: "overlaps", values: &["keep the latest", "no overlaps possible"] },
        ],
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::VerticalFill,
        name: "Vertical Fill",
        description: "Extend or fill an object vertically across contiguous empty or target cells.",
        parameters: &[
            ParamSpec { name: "source_object", values: &SHAPES_4 },
            ParamSpec { name: "row_index", values: &["top of an object", "below an object"] },
            ParamSpec { name: "fill_color", values: &["based on source color"] },
            ParamSpec { name: "sequence", values: &["based on source width", "based on source height"] },
            ParamSpec { name: "stop_condition", values: &["another object", "grid boundary", "specific color"] },
        ],
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::ConnectingBridges,
        name: "Connecting Bridges",
        description: "Draw a \u{201c}bridge\u{201d} (line/shape) between two objects in a specified color order.",
        parameters: &[
            ParamSpec { name: "source_object", values: &SHAPES_4 },
            ParamSpec { name: "target_object", values: &SHAPES_4 },
            ParamSpec {
                name: "bridge_color",
                values: &[
                    "based on bridge starting point",
                    "based on bridge ending point",
                    "based on cavity inside an object",
                ],
            },
            ParamSpec { name: "connection_shape", values: &["line", "triangle", "rectangle", "circle"] },
            ParamSpec { name: "path_direction", values: &["orthogonal", "diagonal", "based on color sequence"] },
            ParamSpec {
                name: "thickness",
                values: &["based on width of cavity", "based on width of starting object"],
            },
        ],
        executable: true,
        roles: &[Role::Source, Role::Target],
    },
    PatternSchema {
        pattern: Pattern::BoundaryAttachmentFill,
        name: "Boundary Attachment Fill",
        description: "Close holes or voids inside an object\u{2019}s boundary bounding area.",
        parameters: params! {
            "objects_with_holes": ["horizontally laid", "vertically laid", "diagonally laid"],
            "attachment_direction": ["left", "right", "top", "bottom"],
            "fill_logic": ["fits in space to form rectangle", "gets laid on the object"],
            "object_filled": ["irregular", "triangle", "rectangle", "square"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::DiagonalFill,
        name: "Diagonal Fill",
        description: "Propagate color or object along a diagonal axis.",
        parameters: params! {
            "source_point_or_corner": ["L-shaped", "rectangle"],
            "direction": ["bottom-right", "top-left", "top-right", "bottom-left"],
            "fill_color": ["same as source", "complementary to source", "change on bounce"],
            "stop_condition": ["object obstruction", "hit grid boundary"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::PatternMatchingFillRemove,
        name: "Pattern Matching Fill / Remove",
        description: "Identify a repeating subpattern and either color it in or erase it.",
        parameters: params! {
            "template_pattern": ["alternate objects", "similar objects", "symmetry via some axis"],
            "operation": ["remove cells to match pattern", "fill cells to match pattern"],
            "fill_color": ["boundary color", "pattern color"],
            "tolerance": ["no tolerance", "edges are exceptions"],
            "target_regions": ["inside a cavity", "outside an object"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::CreatingPatterns,
        name: "Creating Patterns based on starting Objects",
        description: "Generate a larger or repeated pattern seeded from one or more \u{201c}starter\u{201d} objects.",
        parameters: params! {
            "seed_objects": ["colored cell", "rectangle", "diagonal"],
            "transformation_sequence": ["circular", "straight", "fill all", "towards an object"],
            "inter_object_spacing": ["none", "single", "multiple", "variable"],
            "repeat": ["till filling the cavity", "only once"],
            "stopping_condition": ["reached an object", "reached boundary", "filled object completely"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::FindAndColor,
        name: "Find Objects in the Input Image and Color Them",
        description: "Detects all instances of a certain object class and applies a new color.",
        parameters: params! {
            "object_type": ["plus", "rectangle", "irregular", "circle", "cell", "horizontal bar"],
            "new_color": ["complements the original color", "constant throughout", "alternating pattern"],
            "detection_method": ["exact match", "fuzzy", "at some location"],
            "overlap_policy": ["all unique", "overlaps allowed"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::RemoveInSequence,
        name: "Remove Objects from the Output in a Particular Sequence",
        description: "Systematically delete objects one at a time in a defined order.",
        parameters: params! {
            "object_list_ordered": ["all in the row", "all in a column", "same shape"],
            "removal_method": ["erase and color", "replace with background"],
            "trigger_condition": ["based on an object", "leftmost", "rightmost", "topmost", "overlaps"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::Rearrange,
        name: "Rearrange the Objects in the Output in a Particular Sequence/Pattern",
        description: "From a set of objects, only retain those in a given order, rearrange the rest.",
        parameters: params! {
            "keep_sequence": ["ascending order of height", "descending order of height"],
            "color_of_object": ["same as in-place object", "original color"],
            "pattern": ["to a particular part of another object", "to a particular region"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::AlternatingFill,
        name: "Alternating Pattern Filling",
        description: "Fill cells with two (or more) colors/objects in an alternating rhythm (checkerboard, stripes).",
        parameters: params! {
            "colors": ["[\"A\", \"B\"]", "[\"A\", \"A\", \"B\"]"],
            "pattern_type": ["checkerboard", "stripe_vertical", "stripe_horizontal"],
            "internal_sequence_spacing": ["none", "singular"],
        },
        executable: true,
        roles: &[Role::Source, Role::Color],
    },
    PatternSchema {
        pattern: Pattern::TranslationByEnvironment,
        name: "Object Translation Based on Environment Colors",
        description: "Move an object to a place based on the colors surrounding them.",
        parameters: params! {
            "moving_object_shape": ["plus", "square", "rectangle", "all cells"],
            "target_environment_color": ["same as moving object", "complementary color"],
            "translation_vector": ["centroid of the environment colors", "on top of environment color"],
            "step_size": ["arbitrary", "fixed size"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::CavityFill,
        name: "Cavity Fill",
        description: "Fill the cavities inside bigger objects.",
        parameters: params! {
            "object_outline": ["U shaped", "V shaped", "rectangular", "triangle", "square"],
            "max_indent_depth": ["based on available filling material", "till complete object"],
            "fill_color": ["arbitrary", "based on material already present"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::AddReplace,
        name: "Add/Replace an Object",
        description: "Swap out one object for another, preserving position or properties.",
        parameters: params! {
            "source_object": ["horizontal bar", "vertical bar", "rectangle", "square", "circle", "triangle", "irregular"],
            "add_replacement_object": ["horizontal bar", "vertical bar", "rectangle", "square", "circle", "triangle", "cell"],
            "inherit_properties": ["same midpoint", "same centroid", "at some location"],
            "additional_change": ["add a boundary to new object", "do nothing"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::FallingDown,
        name: "Falling Down (Gravity-Effect)",
        description: "Let objects \u{201c}drop\u{201d} vertically until they hit another object or the floor.",
        parameters: params! {
            "object_list": ["cell", "square", "rectangle"],
            "gravity_direction": ["downward"],
            "collision_map": ["horizontal bar", "vertical bar"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::AttachToSimilar,
        name: "Get Attached to Similar Object",
        description: "Move or grow an object until it contacts another of the same type.",
        parameters: params! {
            "moving_object": ["plus", "U shaped", "V shaped", "square", "rectangle", "irregular"],
            "target_object_type": ["rectangle", "square", "irregular"],
            "attachment_rule": ["head on with common color side", "fit into cavity"],
            "movement_path": ["fixed numeric steps", "reach goal"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::TranslationToGoal,
        name: "Object Translation Based on Goal",
        description: "Move objects toward a specified \u{201c}goal\u{201d} region or object.",
        parameters: params! {
            "source_object": ["square", "rectangle", "irregular"],
            "goal_location_or_object": ["square", "matching pattern"],
            "pathfinding_method": ["straight-line", "fixed path"],
            "step_count_or_speed": ["stop on obstacle", "stop on goal", "fixed"],
        },
        executable: true,
        roles: &[Role::Source, Role::Target],
    },
    PatternSchema {
        pattern: Pattern::ObjectDismantles,
        name: "Object Dismantles",
        description: "Break an object into constituent parts or pixels.",
        parameters: params! {
            "source_object": ["irregular", "rectangular", "square"],
            "fragment_shape": ["individual cells", "smaller tiles", "break at hit"],
            "dismantle_sequence": ["outer-to-inner", "when hit by other object", "symmetric"],
            "dispersion_pattern": ["momentum conserved", "toward hit object", "away from hit object"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::Symmetry,
        name: "Symmetry-Based Pattern",
        description: "Reflect or rotate objects/patterns around an axis or point.",
        parameters: params! {
            "symmetry_type": ["horizontal", "vertical", "rotational"],
            "axis_or_center_point": ["horizontal bar", "vertical bar", "single cell"],
            "object_group": ["individual cells", "square"],
            "copy_mode": ["duplicate", "mirror"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::RayCast,
        name: "Ray-Cast / Ray-Trace Pattern",
        description: "Project a \u{201c}ray\u{201d} from a source until it hits a wall or object, marking its path in a shape.",
        parameters: params! {
            "ray_source": ["starting cell", "object"],
            "direction": ["horizontal", "vertical", "diagonal", "change on hit"],
            "shape": ["line", "triangle", "circle", "rectangle"],
            "stop_condition": ["object", "boundary"],
            "mark_color": ["same as starting point", "alternating pattern", "change on hit", "based on other objects"],
        },
        executable: true,
        roles: &[Role::Source],
    },
    PatternSchema {
        pattern: Pattern::Scattering,
        name: "Scattering Pattern",
        description: "Project a scatter-like pattern which is triangular in shape with staircase-like edges, and fills all the cells in its path.",
        parameters: params! {
            "source": ["starting cell", "object"],
            "direction": ["horizontal", "vertical", "diagonal", "radially outwards"],
            "shape": ["triangle"],
            "stop_condition": ["object", "boundary"],
            "mark_color": ["same as starting point", "alternating pattern", "change on hit", "based on other objects"],
            "boundary": [
                "single cell thickness of different color than the pattern",
                "multi cell thickness of different color than the pattern",
            ],
            "edge_pattern": ["staircase with a width 'w' and height 'h', where 'w' and 'h' are number of cells"],
        },
        executable: false,
        roles: &[],
    },
    PatternSchema {
        pattern: Pattern::SmallObjectPatterns,
        name: "Patterns formed using small objects",
        description: "Spatial patterns and color scheme formed by smaller objects.",
        parameters: params! {
            "small_object_type": ["small adjacent objects", "parts of a bigger object"],
            "small_pattern_type": [
                "spatial pattern and/or color scheme pattern formed by smaller distinct objects",
                "coloring scheme pattern formed inside a object",
            ],
        },
        executable: false,
        roles: &[],
    },
];

/// All 22 schemas in library order.
pub fn registry() -> &'static [PatternSchema] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static PatternSchema> {
    REGISTRY.iter().find(|s| s.name == name)
}

impl Pattern {
    pub fn schema(self) -> &'static PatternSchema {
        &REGISTRY[self.index()]
    }

    /// Position in library order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        self.schema().name
    }

    pub fn executable() -> impl Iterator<Item = Pattern> {
        REGISTRY.iter().filter(|s| s.executable).map(|s| s.pattern)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_shape() {
        assert_eq!(registry().len(), 22);
        for (i, s) in registry().iter().enumerate() {
            assert_eq!(s.pattern.index(), i, "{}", s.name);
        }
        assert_eq!(Pattern::executable().count(), 14);
        let hf = lookup("Horizontal Fill").unwrap();
        assert_eq!(
            hf.param("stop_condition").unwrap().values,
            &["another object", "grid boundary", "specific color"]
        );
        assert!(lookup("Rotate90").is_none());
    }

    #[test]
    fn hint_only_patterns() {
        let hint_only: Vec<_> = registry().iter().filter(|s| !s.executable).map(|s| s.pattern).collect();
        assert_eq!(
            hint_only,
            vec![
                Pattern::PatternMatchingFillRemove,
                Pattern::CreatingPatterns,
                Pattern::Rearrange,
                Pattern::TranslationByEnvironment,
                Pattern::AttachToSimilar,
                Pattern::ObjectDismantles,
                Pattern::Scattering,
                Pattern::SmallObjectPatterns,
            ]
        );
    }
}
