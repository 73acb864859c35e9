use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::registry::{lookup, PatternSchema, Role};
use super::DslError;
use crate::grid::Color;
use crate::scene::{SceneGraph, ShapeLabel};

/// Scene-relative object selector. A selector may match several objects, in
/// which case the pattern is applied to each match in scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    All,
    /// Absolute object id; does not transfer between scenes.
    Id(usize),
    /// Objects whose dominant color is the given one.
    Color(Color),
    Shape(ShapeLabel),
    Leftmost,
    Rightmost,
    Topmost,
    Bottommost,
    Largest,
    Smallest,
}

impl Selector {
    /// Indices into `scene.objects`, in scan order.
    pub fn resolve(&self, scene: &SceneGraph) -> Vec<usize> {
        let objs = &scene.objects;
        let pick = |key: &dyn Fn(usize) -> i64| -> Vec<usize> {
            // first index attaining the minimum key
            (0..objs.len()).min_by_key(|&i| (key(i), i)).into_iter().collect()
        };
        match *self {
            Selector::All => (0..objs.len()).collect(),
            Selector::Id(id) => objs.iter().position(|o| o.object_id == id).into_iter().collect(),
            Selector::Color(c) => (0..objs.len()).filter(|&i| objs[i].dominant_color() == c).collect(),
            Selector::Shape(l) => (0..objs.len()).filter(|&i| objs[i].shape_label == l).collect(),
            Selector::Leftmost => pick(&|i| objs[i].bbox.x_min as i64),
            Selector::Rightmost => pick(&|i| -(objs[i].bbox.x_max as i64)),
            Selector::Topmost => pick(&|i| objs[i].bbox.y_min as i64),
            Selector::Bottommost => pick(&|i| -(objs[i].bbox.y_max as i64)),
            Selector::Largest => pick(&|i| -(objs[i].size() as i64)),
            Selector::Smallest => pick(&|i| objs[i].size() as i64),
        }
    }

    /// Whether the selector is expressed without absolute object ids.
    pub fn is_relative(&self) -> bool {
        !matches!(self, Selector::Id(_))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::All => f.write_str("all"),
            Selector::Id(i) => write!(f, "id:{i}"),
            Selector::Color(c) => write!(f, "color:{c}"),
            Selector::Shape(l) => write!(f, "shape:{l}"),
            Selector::Leftmost => f.write_str("leftmost"),
            Selector::Rightmost => f.write_str("rightmost"),
            Selector::Topmost => f.write_str("topmost"),
            Selector::Bottommost => f.write_str("bottommost"),
            Selector::Largest => f.write_str("largest"),
            Selector::Smallest => f.write_str("smallest"),
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown selector {s:?}");
        Ok(match s {
            "all" => Selector::All,
            "leftmost" => Selector::Leftmost,
            "rightmost" => Selector::Rightmost,
            "topmost" => Selector::Topmost,
            "bottommost" => Selector::Bottommost,
            "largest" => Selector::Largest,
            "smallest" => Selector::Smallest,
            _ => match s.split_once(':') {
                Some(("id", n)) => Selector::Id(n.parse().map_err(|_| bad())?),
                Some(("color", n)) => {
                    let c: Color = n.parse().map_err(|_| bad())?;
                    if c > 9 {
                        return Err(bad());
                    }
                    Selector::Color(c)
                }
                Some(("shape", l)) => Selector::Shape(ShapeLabel::parse(l).ok_or_else(bad)?),
                _ => return Err(bad()),
            },
        })
    }
}

impl Serialize for Selector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bindings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Selector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Selector>,
    /// Explicit color for parameter values that name "a specific", "different"
    /// or "arbitrary" color.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
}

impl Bindings {
    pub fn source(sel: Selector) -> Self {
        Self { source: Some(sel), ..Self::default() }
    }

    pub fn with_target(mut self, sel: Selector) -> Self {
        self.target = Some(sel);
        self
    }

    pub fn with_color(mut self, c: Color) -> Self {
        self.color = Some(c);
        self
    }

    fn has(&self, role: Role) -> bool {
        match role {
            Role::Source => self.source.is_some(),
            Role::Target => self.target.is_some(),
            Role::Color => self.color.is_some(),
        }
    }
}

/// One parameterized unit pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternInstance {
    pub pattern_name: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub bindings: Bindings,
}

impl PatternInstance {
    pub fn new(pattern_name: impl Into<String>) -> Self {
        Self { pattern_name: pattern_name.into(), params: BTreeMap::new(), bindings: Bindings::default() }
    }

    pub fn param(mut self, name: &str, value: &str) -> Self {
        self.params.insert(name.to_string(), value.to_string());
        self
    }

    pub fn bind(mut self, bindings: Bindings) -> Self {
        self.bindings = bindings;
        self
    }

    pub fn schema(&self) -> Option<&'static PatternSchema> {
        lookup(&self.pattern_name)
    }

    /// The chosen value of `name`, or the first legal value when unset.
    pub fn value(&self, name: &str) -> &str {
        if let Some(v) = self.params.get(name) {
            return v;
        }
        self.schema()
            .and_then(|s| s.param(name))
            .and_then(|p| p.values.first().copied())
            .unwrap_or("")
    }

    /// Stable textual form: params in key order, bindings in role order.
    pub fn canonical(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut roles = Vec::new();
        if let Some(s) = self.bindings.source {
            roles.push(format!("source={s}"));
        }
        if let Some(t) = self.bindings.target {
            roles.push(format!("target={t}"));
        }
        if let Some(c) = self.bindings.color {
            roles.push(format!("color={c}"));
        }
        format!("{}{{{}}}[{}]", self.pattern_name, params.join("|"), roles.join("|"))
    }
}

/// Roles an instance must bind given its parameter choices.
pub fn required_roles(inst: &PatternInstance, schema: &PatternSchema) -> Vec<Role> {
    let mut roles = schema.roles.to_vec();
    if !schema.executable {
        return roles;
    }
    let v = |n: &str| inst.value(n);
    let needs_color = match schema.name {
        "Horizontal Fill" => {
            v("fill_color") == "based on some different objects" || v("stop_condition") == "specific color"
        }
        "Vertical Fill" => v("stop_condition") == "specific color",
        "Connecting Bridges" => v("bridge_color") == "based on cavity inside an object",
        "Diagonal Fill" => v("fill_color") == "change on bounce",
        "Find Objects in the Input Image and Color Them" => v("new_color") != "complements the original color",
        "Remove Objects from the Output in a Particular Sequence" => v("removal_method") == "erase and color",
        "Cavity Fill" => v("fill_color") == "arbitrary",
        "Add/Replace an Object" => v("additional_change") == "add a boundary to new object",
        "Ray-Cast / Ray-Trace Pattern" => {
            matches!(v("mark_color"), "alternating pattern" | "based on other objects")
        }
        _ => false,
    };
    if needs_color && !roles.contains(&Role::Color) {
        roles.push(Role::Color);
    }
    roles
}

/// Checks the pattern name, every parameter against its enumeration, and the
/// presence of required bindings. Returns the instance unchanged when legal.
pub fn validate_instance(inst: &PatternInstance) -> Result<&PatternInstance, DslError> {
    let schema = inst.schema().ok_or_else(|| DslError::UnknownPattern(inst.pattern_name.clone()))?;
    for (name, value) in &inst.params {
        match schema.param(name) {
            Some(spec) if spec.allows(value) => {}
            _ => return Err(DslError::IllegalParameter { name: name.clone(), value: value.clone() }),
        }
    }
    for role in required_roles(inst, schema) {
        if !inst.bindings.has(role) {
            return Err(DslError::MissingBinding(role));
        }
    }
    if let Some(c) = inst.bindings.color {
        if c > 9 {
            return Err(DslError::IllegalParameter { name: "color".into(), value: c.to_string() });
        }
    }
    Ok(inst)
}
