//! Deterministic semantics of the executable unit patterns.
//!
//! A step reads the rendered input scene and paints into a copy of it; all
//! reads (obstacles, stop colors) see the input canvas, and overlapping writes
//! keep the latest. Per-pattern parameter readings are listed in
//! `docs/semantics.md`.

use super::instance::{validate_instance, Bindings, PatternInstance};
use super::registry::Pattern;
use super::DslError;
use crate::grid::{render, Color, Grid, Pos};
use crate::scene::{abstract_scene_with_background, GridObject, Pixel, SceneGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Obstacle,
    Boundary,
    Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BridgeColor {
    Start,
    End,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BridgePath {
    Orthogonal,
    Diagonal,
    Sequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DiagColor {
    Same,
    Complement,
    Bounce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Recolor {
    Complement,
    Constant,
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rhythm {
    Checkerboard,
    StripeVertical,
    StripeHorizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NewShape {
    HorizontalBar,
    VerticalBar,
    Rectangle,
    Square,
    Circle,
    Triangle,
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    Midpoint,
    Centroid,
    TopLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Approach {
    Obstacle,
    Goal,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reflection {
    Horizontal,
    Vertical,
    Rotational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RayDirection {
    Horizontal,
    Vertical,
    Diagonal,
    TurnOnHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MarkColor {
    Same,
    Alternate,
    Hit,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    HorizontalFill { dir: isize, stop: Stop, bound_color: bool },
    VerticalFill { dir: isize, stop: Stop },
    Bridge { color: BridgeColor, path: BridgePath },
    Attach { side: Option<Side> },
    Diagonal { dir: (isize, isize), color: DiagColor, stop: Stop },
    Recolor(Recolor),
    Remove { erase_color: bool },
    Alternate { triple: bool, rhythm: Rhythm, spaced: bool },
    CavityFill { rim_only: bool, bound_color: bool },
    Replace { shape: NewShape, anchor: Anchor, border: bool },
    Gravity,
    Approach(Approach),
    Mirror { kind: Reflection, duplicate: bool },
    Ray { single_cells: bool, dir: RayDirection, stop: Stop, color: MarkColor },
}

/// A validated executable instance with its parameters decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledStep {
    pattern: Pattern,
    op: Op,
    bindings: Bindings,
}

fn unsupported(pattern: &str, what: &str) -> DslError {
    DslError::SemanticsViolation(format!("{pattern}: {what} has no executable reading"))
}

impl CompiledStep {
    pub fn new(inst: &PatternInstance) -> Result<Self, DslError> {
        validate_instance(inst)?;
        let schema = inst.schema().expect("validated");
        if !schema.executable {
            return Err(DslError::NotExecutable(schema.name.to_string()));
        }
        let v = |n: &str| inst.value(n);
        let stop_fill = |s: &str| match s {
            "another object" => Stop::Obstacle,
            "grid boundary" => Stop::Boundary,
            _ => Stop::Color,
        };
        let op = match schema.pattern {
            Pattern::HorizontalFill => Op::HorizontalFill {
                dir: if v("column_index") == "left of an object" { -1 } else { 1 },
                stop: stop_fill(v("stop_condition")),
                bound_color: v("fill_color") == "based on some different objects",
            },
            Pattern::VerticalFill => Op::VerticalFill {
                dir: if v("row_index") == "top of an object" { -1 } else { 1 },
                stop: stop_fill(v("stop_condition")),
            },
            Pattern::ConnectingBridges => {
                if v("connection_shape") != "line" {
                    return Err(unsupported(schema.name, v("connection_shape")));
                }
                Op::Bridge {
                    color: match v("bridge_color") {
                        "based on bridge starting point" => BridgeColor::Start,
                        "based on bridge ending point" => BridgeColor::End,
                        _ => BridgeColor::Bound,
                    },
                    path: match v("path_direction") {
                        "orthogonal" => BridgePath::Orthogonal,
                        "diagonal" => BridgePath::Diagonal,
                        _ => BridgePath::Sequence,
                    },
                }
            }
            Pattern::BoundaryAttachmentFill => Op::Attach {
                side: match v("fill_logic") {
                    "fits in space to form rectangle" => None,
                    _ => Some(match v("attachment_direction") {
                        "left" => Side::Left,
                        "right" => Side::Right,
                        "top" => Side::Top,
                        _ => Side::Bottom,
                    }),
                },
            },
            Pattern::DiagonalFill => Op::Diagonal {
                dir: match v("direction") {
                    "bottom-right" => (1, 1),
                    "top-left" => (-1, -1),
                    "top-right" => (-1, 1),
                    _ => (1, -1),
                },
                color: match v("fill_color") {
                    "same as source" => DiagColor::Same,
                    "complementary to source" => DiagColor::Complement,
                    _ => DiagColor::Bounce,
                },
                stop: if v("stop_condition") == "object obstruction" { Stop::Obstacle } else { Stop::Boundary },
            },
            Pattern::FindAndColor => Op::Recolor(match v("new_color") {
                "complements the original color" => Recolor::Complement,
                "constant throughout" => Recolor::Constant,
                _ => Recolor::Alternate,
            }),
            Pattern::RemoveInSequence => Op::Remove { erase_color: v("removal_method") == "erase and color" },
            Pattern::AlternatingFill => Op::Alternate {
                triple: v("colors") != "[\"A\", \"B\"]",
                rhythm: match v("pattern_type") {
                    "checkerboard" => Rhythm::Checkerboard,
                    "stripe_vertical" => Rhythm::StripeVertical,
                    _ => Rhythm::StripeHorizontal,
                },
                spaced: v("internal_sequence_spacing") == "singular",
            },
            Pattern::CavityFill => Op::CavityFill {
                rim_only: v("max_indent_depth") == "based on available filling material",
                bound_color: v("fill_color") == "arbitrary",
            },
            Pattern::AddReplace => Op::Replace {
                shape: match v("add_replacement_object") {
                    "horizontal bar" => NewShape::HorizontalBar,
                    "vertical bar" => NewShape::VerticalBar,
                    "rectangle" => NewShape::Rectangle,
                    "square" => NewShape::Square,
                    "circle" => NewShape::Circle,
                    "triangle" => NewShape::Triangle,
                    _ => NewShape::Cell,
                },
                anchor: match v("inherit_properties") {
                    "same midpoint" => Anchor::Midpoint,
                    "same centroid" => Anchor::Centroid,
                    _ => Anchor::TopLeft,
                },
                border: v("additional_change") == "add a boundary to new object",
            },
            Pattern::FallingDown => Op::Gravity,
            Pattern::TranslationToGoal => Op::Approach(match v("step_count_or_speed") {
                "stop on obstacle" => Approach::Obstacle,
                "stop on goal" => Approach::Goal,
                _ => Approach::Fixed,
            }),
            Pattern::Symmetry => Op::Mirror {
                kind: match v("symmetry_type") {
                    "horizontal" => Reflection::Horizontal,
                    "vertical" => Reflection::Vertical,
                    _ => Reflection::Rotational,
                },
                duplicate: v("copy_mode") == "duplicate",
            },
            Pattern::RayCast => {
                if v("shape") != "line" {
                    return Err(unsupported(schema.name, v("shape")));
                }
                Op::Ray {
                    single_cells: v("ray_source") == "starting cell",
                    dir: match v("direction") {
                        "horizontal" => RayDirection::Horizontal,
                        "vertical" => RayDirection::Vertical,
                        "diagonal" => RayDirection::Diagonal,
                        _ => RayDirection::TurnOnHit,
                    },
                    stop: if v("stop_condition") == "object" { Stop::Obstacle } else { Stop::Boundary },
                    color: match v("mark_color") {
                        "same as starting point" => MarkColor::Same,
                        "alternating pattern" => MarkColor::Alternate,
                        "change on hit" => MarkColor::Hit,
                        _ => MarkColor::Bound,
                    },
                }
            }
            _ => return Err(DslError::NotExecutable(schema.name.to_string())),
        };
        Ok(Self { pattern: schema.pattern, op, bindings: inst.bindings })
    }

    pub fn pattern(&self) -> Pattern {
        self.pattern
    }

    /// Paints this step over `canvas`, the rendering of `scene`.
    pub fn apply(&self, scene: &SceneGraph, canvas: &Grid) -> Result<Grid, DslError> {
        let source = self.bindings.source.expect("validated source binding");
        let sources = source.resolve(scene);
        if sources.is_empty() {
            return Err(DslError::BindingResolutionFailed(format!("source {source} matches no object")));
        }
        let mut ctx = Ctx { scene, src: canvas, out: canvas.clone(), bg: scene.background, bound: self.bindings.color };
        let objs: Vec<&GridObject> = sources.iter().map(|&i| &scene.objects[i]).collect();
        match self.op {
            Op::HorizontalFill { dir, stop, bound_color } => ctx.fill_rows(&objs, dir, stop, bound_color)?,
            Op::VerticalFill { dir, stop } => ctx.fill_columns(&objs, dir, stop)?,
            Op::Bridge { color, path } => {
                let targets = self.targets(scene)?;
                ctx.bridges(&sources, &targets, color, path);
            }
            Op::Attach { side } => ctx.attach(&objs, side),
            Op::Diagonal { dir, color, stop } => ctx.diagonal(&objs, dir, color, stop),
            Op::Recolor(mode) => ctx.recolor(&objs, mode),
            Op::Remove { erase_color } => {
                let c = if erase_color { ctx.bound() } else { ctx.bg };
                for o in &objs {
                    ctx.paint_pixels(o.pixels.iter().map(Pixel::pos), c);
                }
            }
            Op::Alternate { triple, rhythm, spaced } => ctx.alternate(&objs, triple, rhythm, spaced),
            Op::CavityFill { rim_only, bound_color } => ctx.cavity_fill(&objs, rim_only, bound_color),
            Op::Replace { shape, anchor, border } => ctx.replace(&objs, shape, anchor, border)?,
            Op::Gravity => ctx.gravity(&sources),
            Op::Approach(mode) => {
                let targets = self.targets(scene)?;
                ctx.approach(&sources, &targets, mode);
            }
            Op::Mirror { kind, duplicate } => {
                let axis = match self.bindings.target {
                    Some(_) => Some(self.targets(scene)?[0]),
                    None => None,
                };
                ctx.mirror(&objs, axis, kind, duplicate);
            }
            Op::Ray { single_cells, dir, stop, color } => ctx.rays(&objs, single_cells, dir, stop, color)?,
        }
        Ok(ctx.out)
    }

    fn targets(&self, scene: &SceneGraph) -> Result<Vec<usize>, DslError> {
        let sel = self
            .bindings
            .target
            .ok_or_else(|| DslError::BindingResolutionFailed("no target binding".into()))?;
        let t = sel.resolve(scene);
        if t.is_empty() {
            return Err(DslError::BindingResolutionFailed(format!("target {sel} matches no object")));
        }
        Ok(t)
    }
}

/// Applies one step; the result is re-abstracted with the input background.
pub fn execute_step(inst: &PatternInstance, scene: &SceneGraph) -> Result<SceneGraph, DslError> {
    let step = CompiledStep::new(inst)?;
    let (h, w) = scene.source_dims;
    let canvas = render(scene, h, w).map_err(|e| DslError::SemanticsViolation(e.to_string()))?;
    let out = step.apply(scene, &canvas)?;
    Ok(abstract_scene_with_background(&out, scene.background))
}

/// Fixed color complement used by the "complementary" parameter values.
pub fn complement(c: Color) -> Color {
    9 - c
}

struct Trace {
    cells: Vec<Pos>,
    /// First non-background cell met, with its color.
    hit: Option<(Pos, Color)>,
}

struct Ctx<'a> {
    scene: &'a SceneGraph,
    src: &'a Grid,
    out: Grid,
    bg: Color,
    bound: Option<Color>,
}

impl Ctx<'_> {
    fn bound(&self) -> Color {
        self.bound.expect("validated color binding")
    }

    fn paint(&mut self, (y, x): Pos, c: Color) {
        self.out.set(y, x, c);
    }

    fn paint_pixels(&mut self, cells: impl IntoIterator<Item = Pos>, c: Color) {
        for p in cells {
            self.paint(p, c);
        }
    }

    fn is_bg(&self, (y, x): Pos) -> bool {
        self.src.get(y, x) == self.bg
    }

    fn trace(&self, start: Pos, (dy, dx): (isize, isize), stop: Stop) -> Result<Trace, DslError> {
        let (mut y, mut x) = (start.0 as isize, start.1 as isize);
        let mut cells = Vec::new();
        let mut hit = None;
        loop {
            y += dy;
            x += dx;
            let Some(c) = self.src.get_signed(y, x) else {
                if stop == Stop::Color {
                    return Err(DslError::SemanticsViolation(format!(
                        "fill from {start:?} left the grid without meeting color {}",
                        self.bound()
                    )));
                }
                break;
            };
            let here = (y as usize, x as usize);
            match stop {
                Stop::Obstacle if c != self.bg => {
                    hit = Some((here, c));
                    break;
                }
                Stop::Color if c == self.bound() => {
                    hit = Some((here, c));
                    break;
                }
                Stop::Boundary if c != self.bg && hit.is_none() => hit = Some((here, c)),
                _ => {}
            }
            cells.push(here);
        }
        Ok(Trace { cells, hit })
    }

    fn fill_rows(&mut self, objs: &[&GridObject], dir: isize, stop: Stop, bound_color: bool) -> Result<(), DslError> {
        for o in objs {
            for y in o.bbox.y_min..=o.bbox.y_max {
                let row = o.pixels.iter().filter(|p| p.y == y);
                let edge = if dir > 0 { row.max_by_key(|p| p.x) } else { row.min_by_key(|p| p.x) };
                let Some(edge) = edge else { continue };
                let color = if bound_color { self.bound() } else { edge.color };
                let t = self.trace(edge.pos(), (0, dir), stop)?;
                self.paint_pixels(t.cells, color);
            }
        }
        Ok(())
    }

    fn fill_columns(&mut self, objs: &[&GridObject], dir: isize, stop: Stop) -> Result<(), DslError> {
        for o in objs {
            for x in o.bbox.x_min..=o.bbox.x_max {
                let col = o.pixels.iter().filter(|p| p.x == x);
                let edge = if dir > 0 { col.max_by_key(|p| p.y) } else { col.min_by_key(|p| p.y) };
                let Some(edge) = edge else { continue };
                let t = self.trace(edge.pos(), (dir, 0), stop)?;
                self.paint_pixels(t.cells, edge.color);
            }
        }
        Ok(())
    }

    fn bridges(&mut self, sources: &[usize], targets: &[usize], color: BridgeColor, path: BridgePath) {
        let objs = &self.scene.objects;
        for &s in sources {
            for &t in targets {
                if s == t || (t < s && sources.contains(&t) && targets.contains(&s)) {
                    continue;
                }
                let (so, to) = (&objs[s], &objs[t]);
                let (even, odd) = match (path, color) {
                    (BridgePath::Sequence, _) => (so.dominant_color(), to.dominant_color()),
                    (_, BridgeColor::Start) => (so.dominant_color(), so.dominant_color()),
                    (_, BridgeColor::End) => (to.dominant_color(), to.dominant_color()),
                    (_, BridgeColor::Bound) => (self.bound(), self.bound()),
                };
                match path {
                    BridgePath::Orthogonal | BridgePath::Sequence => {
                        for cells in orthogonal_bridges(so, to) {
                            if cells.iter().all(|&c| self.is_bg(c)) {
                                for (i, c) in cells.into_iter().enumerate() {
                                    self.paint(c, if i % 2 == 0 { even } else { odd });
                                }
                            }
                        }
                    }
                    BridgePath::Diagonal => {
                        for p in &so.pixels {
                            for d in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                                let t = self.trace(p.pos(), d, Stop::Obstacle).expect("obstacle stop");
                                let reaches = t.hit.is_some_and(|(hp, _)| {
                                    to.pixels.binary_search_by_key(&hp, Pixel::pos).is_ok()
                                });
                                if reaches && !t.cells.is_empty() {
                                    self.paint_pixels(t.cells, even);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn attach(&mut self, objs: &[&GridObject], side: Option<Side>) {
        for o in objs {
            let color = self.bound.unwrap_or_else(|| o.dominant_color());
            let b = o.bbox;
            match side {
                None => {
                    for y in b.y_min..=b.y_max {
                        for x in b.x_min..=b.x_max {
                            if self.is_bg((y, x)) {
                                self.paint((y, x), color);
                            }
                        }
                    }
                }
                Some(side) => {
                    let lines: Vec<Vec<Pos>> = match side {
                        Side::Bottom => (b.x_min..=b.x_max).map(|x| (b.y_min..=b.y_max).rev().map(|y| (y, x)).collect()).collect(),
                        Side::Top => (b.x_min..=b.x_max).map(|x| (b.y_min..=b.y_max).map(|y| (y, x)).collect()).collect(),
                        Side::Left => (b.y_min..=b.y_max).map(|y| (b.x_min..=b.x_max).map(|x| (y, x)).collect()).collect(),
                        Side::Right => (b.y_min..=b.y_max).map(|y| (b.x_min..=b.x_max).rev().map(|x| (y, x)).collect()).collect(),
                    };
                    for line in lines {
                        for c in line {
                            if !self.is_bg(c) {
                                break;
                            }
                            self.paint(c, color);
                        }
                    }
                }
            }
        }
    }

    fn diagonal(&mut self, objs: &[&GridObject], dir: (isize, isize), color: DiagColor, stop: Stop) {
        let (h, w) = self.src.dims();
        for o in objs {
            let start = extreme_pixel(o, dir);
            let first = match color {
                DiagColor::Complement => complement(start.color),
                _ => start.color,
            };
            let (mut y, mut x) = (start.y as isize, start.x as isize);
            let mut d = dir;
            let mut bounced = false;
            for _ in 0..2 * h * w {
                let (mut ny, mut nx) = (y + d.0, x + d.1);
                if !self.src.contains(ny, nx) {
                    if color != DiagColor::Bounce || bounced {
                        break;
                    }
                    if !(0..h as isize).contains(&ny) {
                        d.0 = -d.0;
                    }
                    if !(0..w as isize).contains(&nx) {
                        d.1 = -d.1;
                    }
                    bounced = true;
                    ny = y + d.0;
                    nx = x + d.1;
                    if !self.src.contains(ny, nx) {
                        break;
                    }
                }
                let here = (ny as usize, nx as usize);
                if !self.is_bg(here) && (stop == Stop::Obstacle || bounced) {
                    break;
                }
                self.paint(here, if bounced { self.bound() } else { first });
                y = ny;
                x = nx;
            }
        }
    }

    fn recolor(&mut self, objs: &[&GridObject], mode: Recolor) {
        for (i, o) in objs.iter().enumerate() {
            for p in &o.pixels {
                let c = match mode {
                    Recolor::Complement => complement(p.color),
                    Recolor::Constant => self.bound(),
                    Recolor::Alternate if i % 2 == 0 => self.bound(),
                    Recolor::Alternate => p.color,
                };
                self.paint(p.pos(), c);
            }
        }
    }

    fn alternate(&mut self, objs: &[&GridObject], triple: bool, rhythm: Rhythm, spaced: bool) {
        for o in objs {
            let (a, b) = (o.dominant_color(), self.bound());
            let base: &[Color] = if triple { &[a, a, b] } else { &[a, b] };
            let seq: Vec<Color> =
                if spaced { base.iter().flat_map(|&c| [c, self.bg]).collect() } else { base.to_vec() };
            for p in &o.pixels {
                let (dy, dx) = (p.y - o.bbox.y_min, p.x - o.bbox.x_min);
                let idx = match rhythm {
                    Rhythm::Checkerboard => dy + dx,
                    Rhythm::StripeVertical => dx,
                    Rhythm::StripeHorizontal => dy,
                };
                self.paint(p.pos(), seq[idx % seq.len()]);
            }
        }
    }

    fn cavity_fill(&mut self, objs: &[&GridObject], rim_only: bool, bound_color: bool) {
        for o in objs {
            let color = if bound_color { self.bound() } else { o.dominant_color() };
            for cav in &o.cavities {
                for &(y, x) in &cav.pixels {
                    let touches_rim = || {
                        [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dy, dx)| {
                            let (ny, nx) = (y as isize + dy, x as isize + dx);
                            ny >= 0
                                && nx >= 0
                                && o.pixels.binary_search_by_key(&(ny as usize, nx as usize), Pixel::pos).is_ok()
                        })
                    };
                    if !rim_only || touches_rim() {
                        self.paint((y, x), color);
                    }
                }
            }
        }
    }

    fn replace(&mut self, objs: &[&GridObject], shape: NewShape, anchor: Anchor, border: bool) -> Result<(), DslError> {
        for o in objs {
            self.paint_pixels(o.pixels.iter().map(Pixel::pos), self.bg);
        }
        let (h, w) = self.src.dims();
        for o in objs {
            let offsets = shape_offsets(shape, o.height, o.width);
            let (sh, sw) = offsets.iter().fold((0, 0), |(a, b), &(y, x)| (a.max(y + 1), b.max(x + 1)));
            let (top, left) = match anchor {
                Anchor::TopLeft => (o.bbox.y_min as isize, o.bbox.x_min as isize),
                Anchor::Midpoint | Anchor::Centroid => {
                    let (cy, cx) = if anchor == Anchor::Midpoint { o.bbox_midpoint() } else { o.centroid.nearest_cell() };
                    (cy as isize - (sh as isize - 1) / 2, cx as isize - (sw as isize - 1) / 2)
                }
            };
            let cells: Vec<(isize, isize)> =
                offsets.iter().map(|&(y, x)| (top + y as isize, left + x as isize)).collect();
            if let Some(&(y, x)) = cells.iter().find(|&&(y, x)| !self.src.contains(y, x)) {
                return Err(DslError::SemanticsViolation(format!(
                    "replacement cell ({y}, {x}) falls outside the {h}x{w} grid"
                )));
            }
            let color = o.dominant_color();
            for &(y, x) in &cells {
                self.paint((y as usize, x as usize), color);
            }
            if border {
                let ring = self.bound();
                for &(y, x) in &cells {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            let (ny, nx) = (y + dy, x + dx);
                            if self.src.contains(ny, nx) && !cells.contains(&(ny, nx)) {
                                self.paint((ny as usize, nx as usize), ring);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn gravity(&mut self, sources: &[usize]) {
        let objs = &self.scene.objects;
        let mut order = sources.to_vec();
        order.sort_by_key(|&i| (std::cmp::Reverse(objs[i].bbox.y_max), i));
        let (h, w) = self.src.dims();
        let mut occupied: Vec<bool> = self.src.cells().iter().map(|&c| c != self.bg).collect();
        for i in order {
            let o = &objs[i];
            for p in &o.pixels {
                occupied[p.y * w + p.x] = false;
                self.paint(p.pos(), self.bg);
            }
            let mut drop = 0;
            while o.pixels.iter().all(|p| p.y + drop + 1 < h && !occupied[(p.y + drop + 1) * w + p.x]) {
                drop += 1;
            }
            for p in &o.pixels {
                occupied[(p.y + drop) * w + p.x] = true;
                self.paint((p.y + drop, p.x), p.color);
            }
        }
    }

    fn approach(&mut self, sources: &[usize], targets: &[usize], mode: Approach) {
        let objs = &self.scene.objects;
        let w = self.src.width();
        for &s in sources {
            let o = &objs[s];
            let mut best: Option<(usize, (isize, isize))> = None;
            for &t in targets {
                if t == s {
                    continue;
                }
                let Some((gap, dir)) = facing_gap(o, &objs[t]) else { continue };
                if best.is_none_or(|(g, _)| gap < g) {
                    best = Some((gap, dir));
                }
            }
            let Some((gap, (dy, dx))) = best else { continue };
            let occupied: Vec<bool> = self.out.cells().iter().map(|&c| c != self.bg).collect();
            let mine = |y: isize, x: isize| o.pixels.binary_search_by_key(&(y as usize, x as usize), Pixel::pos).is_ok();
            let distance = match mode {
                Approach::Goal => gap,
                Approach::Fixed => gap.min(1),
                Approach::Obstacle => {
                    let mut d = 0;
                    loop {
                        let k = d as isize + 1;
                        let free = o.pixels.iter().all(|p| {
                            let (ny, nx) = (p.y as isize + dy * k, p.x as isize + dx * k);
                            self.src.contains(ny, nx) && (mine(ny, nx) || !occupied[ny as usize * w + nx as usize])
                        });
                        if !free {
                            break d;
                        }
                        d += 1;
                    }
                }
            };
            if distance == 0 {
                continue;
            }
            for p in &o.pixels {
                self.paint(p.pos(), self.bg);
            }
            let k = distance as isize;
            for p in &o.pixels {
                let (ny, nx) = (p.y as isize + dy * k, p.x as isize + dx * k);
                if self.src.contains(ny, nx) {
                    self.paint((ny as usize, nx as usize), p.color);
                }
            }
        }
    }

    fn mirror(&mut self, objs: &[&GridObject], axis: Option<usize>, kind: Reflection, duplicate: bool) {
        let (h, w) = self.src.dims();
        let (cy2, cx2) = match axis {
            Some(t) => {
                let b = self.scene.objects[t].bbox;
                ((b.y_min + b.y_max) as isize, (b.x_min + b.x_max) as isize)
            }
            None => (h as isize - 1, w as isize - 1),
        };
        let flip_y = kind != Reflection::Horizontal;
        let flip_x = kind != Reflection::Vertical;
        for o in objs {
            let b = o.bbox;
            let shift_y = cy2 - b.y_max as isize - b.y_min as isize;
            let shift_x = cx2 - b.x_max as isize - b.x_min as isize;
            for p in &o.pixels {
                let (y, x) = (p.y as isize, p.x as isize);
                let ny = match (flip_y, duplicate) {
                    (false, _) => y,
                    (true, false) => cy2 - y,
                    (true, true) => y + shift_y,
                };
                let nx = match (flip_x, duplicate) {
                    (false, _) => x,
                    (true, false) => cx2 - x,
                    (true, true) => x + shift_x,
                };
                if self.src.contains(ny, nx) {
                    self.paint((ny as usize, nx as usize), p.color);
                }
            }
        }
    }

    fn rays(
        &mut self,
        objs: &[&GridObject],
        single_cells: bool,
        dir: RayDirection,
        stop: Stop,
        color: MarkColor,
    ) -> Result<(), DslError> {
        for o in objs {
            if single_cells && o.size() != 1 {
                continue;
            }
            let mut starts: Vec<(Pixel, (isize, isize))> = Vec::new();
            match dir {
                RayDirection::Horizontal => {
                    for y in o.bbox.y_min..=o.bbox.y_max {
                        let row: Vec<&Pixel> = o.pixels.iter().filter(|p| p.y == y).collect();
                        if let (Some(l), Some(r)) = (row.first(), row.last()) {
                            starts.push((**l, (0, -1)));
                            starts.push((**r, (0, 1)));
                        }
                    }
                }
                RayDirection::Vertical | RayDirection::TurnOnHit => {
                    for x in o.bbox.x_min..=o.bbox.x_max {
                        let col: Vec<&Pixel> = o.pixels.iter().filter(|p| p.x == x).collect();
                        if let (Some(t), Some(b)) = (col.first(), col.last()) {
                            starts.push((**t, (-1, 0)));
                            if dir == RayDirection::Vertical {
                                starts.push((**b, (1, 0)));
                            }
                        }
                    }
                }
                RayDirection::Diagonal => {
                    for d in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
                        starts.push((extreme_pixel(o, d), d));
                    }
                }
            }
            for (start, d) in starts {
                let mut t = self.trace(start.pos(), d, stop)?;
                if dir == RayDirection::TurnOnHit && stop == Stop::Obstacle && t.hit.is_some() {
                    let corner = t.cells.last().copied().unwrap_or(start.pos());
                    let turn = self.trace(corner, (0, 1), stop)?;
                    t.cells.extend(turn.cells);
                }
                let paint: Vec<(Pos, Color)> = match color {
                    MarkColor::Same => t.cells.iter().map(|&c| (c, start.color)).collect(),
                    MarkColor::Bound => t.cells.iter().map(|&c| (c, self.bound())).collect(),
                    MarkColor::Alternate => t
                        .cells
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| (c, if i % 2 == 0 { start.color } else { self.bound() }))
                        .collect(),
                    MarkColor::Hit => match t.hit {
                        Some((_, hc)) => t.cells.iter().map(|&c| (c, hc)).collect(),
                        None => Vec::new(),
                    },
                };
                for (c, col) in paint {
                    self.paint(c, col);
                }
            }
        }
        Ok(())
    }
}

/// Pixel maximizing the projection onto `dir`; ties keep scan order.
fn extreme_pixel(o: &GridObject, (dy, dx): (isize, isize)) -> Pixel {
    let mut best = o.pixels[0];
    let key = |p: &Pixel| dy * p.y as isize + dx * p.x as isize;
    for p in &o.pixels[1..] {
        if key(p) > key(&best) {
            best = *p;
        }
    }
    best
}

/// Straight bridge segments between two objects: one per shared row (when
/// horizontally separated) and one per shared column (when vertically
/// separated), each listed from the source side.
fn orthogonal_bridges(s: &GridObject, t: &GridObject) -> Vec<Vec<Pos>> {
    let mut out = Vec::new();
    let y_lo = s.bbox.y_min.max(t.bbox.y_min);
    let y_hi = s.bbox.y_max.min(t.bbox.y_max);
    for y in y_lo..=y_hi.max(y_lo) {
        if y > y_hi {
            break;
        }
        let sx: Vec<usize> = s.pixels.iter().filter(|p| p.y == y).map(|p| p.x).collect();
        let tx: Vec<usize> = t.pixels.iter().filter(|p| p.y == y).map(|p| p.x).collect();
        let (Some(&s_lo), Some(&s_hi), Some(&t_lo), Some(&t_hi)) = (sx.first(), sx.last(), tx.first(), tx.last())
        else {
            continue;
        };
        if s_hi + 1 < t_lo {
            out.push((s_hi + 1..t_lo).map(|x| (y, x)).collect());
        } else if t_hi + 1 < s_lo {
            out.push((t_hi + 1..s_lo).rev().map(|x| (y, x)).collect());
        }
    }
    let x_lo = s.bbox.x_min.max(t.bbox.x_min);
    let x_hi = s.bbox.x_max.min(t.bbox.x_max);
    for x in x_lo..=x_hi.max(x_lo) {
        if x > x_hi {
            break;
        }
        let mut sy: Vec<usize> = s.pixels.iter().filter(|p| p.x == x).map(|p| p.y).collect();
        let mut ty: Vec<usize> = t.pixels.iter().filter(|p| p.x == x).map(|p| p.y).collect();
        sy.sort_unstable();
        ty.sort_unstable();
        let (Some(&s_lo), Some(&s_hi), Some(&t_lo), Some(&t_hi)) = (sy.first(), sy.last(), ty.first(), ty.last())
        else {
            continue;
        };
        if s_hi + 1 < t_lo {
            out.push((s_hi + 1..t_lo).map(|y| (y, x)).collect());
        } else if t_hi + 1 < s_lo {
            out.push((t_hi + 1..s_lo).rev().map(|y| (y, x)).collect());
        }
    }
    out
}

/// Gap in cells and unit direction from `o` toward `t` when their bounding
/// boxes overlap on one axis and are separated on the other.
fn facing_gap(o: &GridObject, t: &GridObject) -> Option<(usize, (isize, isize))> {
    let (a, b) = (o.bbox, t.bbox);
    let rows_overlap = a.y_min <= b.y_max && b.y_min <= a.y_max;
    let cols_overlap = a.x_min <= b.x_max && b.x_min <= a.x_max;
    if rows_overlap && a.x_max < b.x_min {
        Some((b.x_min - a.x_max - 1, (0, 1)))
    } else if rows_overlap && b.x_max < a.x_min {
        Some((a.x_min - b.x_max - 1, (0, -1)))
    } else if cols_overlap && a.y_max < b.y_min {
        Some((b.y_min - a.y_max - 1, (1, 0)))
    } else if cols_overlap && b.y_max < a.y_min {
        Some((a.y_min - b.y_max - 1, (-1, 0)))
    } else {
        None
    }
}

/// Cell offsets of a generated shape sized from a source bounding box.
fn shape_offsets(shape: NewShape, h: usize, w: usize) -> Vec<Pos> {
    let full = |h: usize, w: usize| -> Vec<Pos> { (0..h).flat_map(|y| (0..w).map(move |x| (y, x))).collect() };
    match shape {
        NewShape::HorizontalBar => full(1, w),
        NewShape::VerticalBar => full(h, 1),
        NewShape::Rectangle => full(h, w),
        NewShape::Square => {
            let s = h.min(w);
            full(s, s)
        }
        NewShape::Circle => {
            let corners = [(0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1)];
            full(h, w).into_iter().filter(|p| h < 3 || w < 3 || !corners.contains(p)).collect()
        }
        NewShape::Triangle => (0..h)
            .flat_map(|y| {
                let len = ((y + 1) * w).div_ceil(h);
                (0..len).map(move |x| (y, x))
            })
            .collect(),
        NewShape::Cell => vec![(0, 0)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Bindings, Selector};
    use crate::grid::render;
    use crate::scene::abstract_scene;

    fn g(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn run(inst: &PatternInstance, grid: &Grid) -> Result<Grid, DslError> {
        let scene = abstract_scene(grid);
        let out = execute_step(inst, &scene)?;
        Ok(render(&out, grid.height(), grid.width()).unwrap())
    }

    #[test]
    fn horizontal_fill_to_boundary() {
        let grid = g(&[&[0, 0, 0], &[0, 4, 0], &[0, 0, 0]]);
        let inst = PatternInstance::new("Horizontal Fill")
            .param("column_index", "right of an object")
            .param("stop_condition", "grid boundary")
            .bind(Bindings::source(Selector::Color(4)));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0], &[0, 4, 4], &[0, 0, 0]]));
    }

    #[test]
    fn horizontal_fill_stops_at_object() {
        let grid = g(&[&[3, 0, 0, 5, 0]]);
        let inst = PatternInstance::new("Horizontal Fill")
            .param("column_index", "right of an object")
            .param("stop_condition", "another object")
            .bind(Bindings::source(Selector::Color(3)));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[3, 3, 3, 5, 0]]));
    }

    #[test]
    fn specific_color_stop_must_be_met() {
        let grid = g(&[&[3, 0, 0, 5, 0]]);
        let base = PatternInstance::new("Horizontal Fill")
            .param("column_index", "right of an object")
            .param("stop_condition", "specific color");
        let hits = base.clone().bind(Bindings::source(Selector::Color(3)).with_color(5));
        assert_eq!(run(&hits, &grid).unwrap(), g(&[&[3, 3, 3, 5, 0]]));
        let misses = base.bind(Bindings::source(Selector::Color(3)).with_color(7));
        assert!(matches!(run(&misses, &grid), Err(DslError::SemanticsViolation(_))));
    }

    #[test]
    fn vertical_fill_up() {
        let grid = g(&[&[0, 0], &[0, 0], &[2, 0]]);
        let inst = PatternInstance::new("Vertical Fill")
            .param("row_index", "top of an object")
            .param("stop_condition", "grid boundary")
            .bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[2, 0], &[2, 0], &[2, 0]]));
    }

    #[test]
    fn mirror_left_half_onto_right() {
        let grid = g(&[&[1, 2, 0, 0], &[0, 3, 0, 0], &[0, 0, 0, 0]]);
        let inst = PatternInstance::new("Symmetry-Based Pattern")
            .param("symmetry_type", "horizontal")
            .param("copy_mode", "mirror")
            .bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[1, 2, 2, 1], &[0, 3, 3, 0], &[0, 0, 0, 0]]));
    }

    #[test]
    fn duplicate_keeps_orientation() {
        let grid = g(&[&[1, 2, 0, 0, 0]]);
        let inst = PatternInstance::new("Symmetry-Based Pattern")
            .param("symmetry_type", "horizontal")
            .param("copy_mode", "duplicate")
            .bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[1, 2, 0, 1, 2]]));
    }

    #[test]
    fn cavity_fill_uses_ring_color() {
        let grid = g(&[&[0, 0, 0, 0, 0], &[0, 6, 6, 6, 0], &[0, 6, 0, 6, 0], &[0, 6, 6, 6, 0], &[0, 0, 0, 0, 0]]);
        let inst = PatternInstance::new("Cavity Fill")
            .param("fill_color", "based on material already present")
            .bind(Bindings::source(Selector::All));
        let out = run(&inst, &grid).unwrap();
        assert_eq!(out.get(2, 2), 6);
        assert_eq!(out.diff_count(&grid), Some(1));
    }

    #[test]
    fn gravity_stacks() {
        let grid = g(&[&[1, 0], &[0, 0], &[2, 0], &[0, 0]]);
        let inst = PatternInstance::new("Falling Down (Gravity-Effect)").bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0], &[0, 0], &[1, 0], &[2, 0]]));
    }

    #[test]
    fn bridges_connect_facing_objects() {
        let grid = g(&[&[0, 0, 0, 0, 0], &[4, 0, 0, 0, 7], &[0, 0, 0, 0, 0]]);
        let inst = PatternInstance::new("Connecting Bridges")
            .param("bridge_color", "based on bridge ending point")
            .bind(Bindings::source(Selector::Color(4)).with_target(Selector::Color(7)));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0, 0, 0], &[4, 7, 7, 7, 7], &[0, 0, 0, 0, 0]]));
        let seq = PatternInstance::new("Connecting Bridges")
            .param("path_direction", "based on color sequence")
            .bind(Bindings::source(Selector::Color(4)).with_target(Selector::Color(7)));
        assert_eq!(run(&seq, &grid).unwrap(), g(&[&[0, 0, 0, 0, 0], &[4, 4, 7, 4, 7], &[0, 0, 0, 0, 0]]));
    }

    #[test]
    fn non_line_bridge_is_a_violation() {
        let grid = g(&[&[4, 0, 7]]);
        let inst = PatternInstance::new("Connecting Bridges")
            .param("connection_shape", "circle")
            .bind(Bindings::source(Selector::Color(4)).with_target(Selector::Color(7)));
        assert!(matches!(run(&inst, &grid), Err(DslError::SemanticsViolation(_))));
    }

    #[test]
    fn approach_goal_until_contact() {
        let grid = g(&[&[2, 0, 0, 0, 5]]);
        let inst = PatternInstance::new("Object Translation Based on Goal")
            .param("step_count_or_speed", "stop on goal")
            .bind(Bindings::source(Selector::Color(2)).with_target(Selector::Color(5)));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0, 2, 5]]));
        let fixed = PatternInstance::new("Object Translation Based on Goal")
            .param("step_count_or_speed", "fixed")
            .bind(Bindings::source(Selector::Color(2)).with_target(Selector::Color(5)));
        assert_eq!(run(&fixed, &grid).unwrap(), g(&[&[0, 2, 0, 0, 5]]));
    }

    #[test]
    fn ray_colored_by_hit() {
        let grid = g(&[&[0, 0, 0], &[0, 0, 0], &[8, 0, 0], &[0, 0, 0], &[3, 0, 0]]);
        let inst = PatternInstance::new("Ray-Cast / Ray-Trace Pattern")
            .param("direction", "vertical")
            .param("mark_color", "change on hit")
            .bind(Bindings::source(Selector::Color(3)));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0], &[0, 0, 0], &[8, 0, 0], &[8, 0, 0], &[3, 0, 0]]));
    }

    #[test]
    fn replace_with_centered_bar() {
        let grid = g(&[&[0, 0, 0, 0, 0], &[0, 5, 5, 5, 0], &[0, 5, 5, 5, 0], &[0, 5, 5, 5, 0], &[0, 0, 0, 0, 0]]);
        let inst = PatternInstance::new("Add/Replace an Object")
            .param("add_replacement_object", "horizontal bar")
            .param("inherit_properties", "same midpoint")
            .param("additional_change", "do nothing")
            .bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0, 0, 0], &[0, 0, 0, 0, 0], &[0, 5, 5, 5, 0], &[0, 0, 0, 0, 0], &[0, 0, 0, 0, 0]]));
    }

    #[test]
    fn alternating_checkerboard() {
        let grid = g(&[&[0, 0, 0, 0], &[0, 1, 1, 1], &[0, 1, 1, 1]]);
        let inst = PatternInstance::new("Alternating Pattern Filling")
            .param("pattern_type", "checkerboard")
            .bind(Bindings::source(Selector::All).with_color(2));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0, 0], &[0, 1, 2, 1], &[0, 2, 1, 2]]));
    }

    #[test]
    fn attach_forms_rectangle() {
        let grid = g(&[&[0, 0, 0, 0], &[0, 3, 0, 3], &[0, 3, 3, 3]]);
        let inst = PatternInstance::new("Boundary Attachment Fill").bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[0, 0, 0, 0], &[0, 3, 3, 3], &[0, 3, 3, 3]]));
    }

    #[test]
    fn diagonal_from_corner() {
        let grid = g(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        let inst = PatternInstance::new("Diagonal Fill")
            .param("direction", "bottom-right")
            .bind(Bindings::source(Selector::All));
        assert_eq!(run(&inst, &grid).unwrap(), g(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn unresolved_source_fails() {
        let grid = g(&[&[1, 0]]);
        let inst = PatternInstance::new("Cavity Fill").bind(Bindings::source(Selector::Color(9)).with_color(1));
        assert!(matches!(run(&inst, &grid), Err(DslError::BindingResolutionFailed(_))));
    }

    #[test]
    fn hint_only_is_not_executable() {
        let grid = g(&[&[1, 0]]);
        let inst = PatternInstance::new("Object Dismantles");
        assert_eq!(run(&inst, &grid), Err(DslError::NotExecutable("Object Dismantles".into())));
    }

    #[test]
    fn input_scene_untouched() {
        let grid = g(&[&[0, 0, 0], &[0, 4, 0], &[0, 0, 0]]);
        let scene = abstract_scene(&grid);
        let before = scene.clone();
        let inst = PatternInstance::new("Horizontal Fill")
            .param("stop_condition", "grid boundary")
            .param("column_index", "right of an object")
            .bind(Bindings::source(Selector::All));
        let a = execute_step(&inst, &scene).unwrap();
        let b = execute_step(&inst, &scene).unwrap();
        assert_eq!(scene, before);
        assert_eq!(a, b);
    }
}
