//! Grid → scene graph: background estimation, 8-connected objects and their
//! feature bundles (bounding box, centroid, canonical shape, histogram,
//! cavities, shape label).

use std::collections::VecDeque;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::grid::{Color, Grid, Pos, NUM_COLORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub y: usize,
    pub x: usize,
    pub color: Color,
}

impl Pixel {
    pub fn new(y: usize, x: usize, color: Color) -> Self {
        Self { y, x, color }
    }

    pub fn pos(&self) -> Pos {
        (self.y, self.x)
    }
}

/// Inclusive cell bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub y_min: usize,
    pub x_min: usize,
    pub y_max: usize,
    pub x_max: usize,
}

impl BBox {
    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        (self.y_min..=self.y_max).contains(&y) && (self.x_min..=self.x_max).contains(&x)
    }

    pub fn on_border(&self, y: usize, x: usize) -> bool {
        y == self.y_min || y == self.y_max || x == self.x_min || x == self.x_max
    }

    fn of<I: IntoIterator<Item = Pos>>(cells: I) -> Option<Self> {
        let mut it = cells.into_iter();
        let (y, x) = it.next()?;
        let mut b = BBox { y_min: y, x_min: x, y_max: y, x_max: x };
        for (y, x) in it {
            b.y_min = b.y_min.min(y);
            b.y_max = b.y_max.max(y);
            b.x_min = b.x_min.min(x);
            b.x_max = b.x_max.max(x);
        }
        Some(b)
    }
}

/// Exact mean pixel position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Centroid {
    pub y: Ratio<i64>,
    pub x: Ratio<i64>,
}

impl Centroid {
    pub fn to_f64(&self) -> (f64, f64) {
        let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        (f(self.y), f(self.x))
    }

    /// Nearest cell, rounding halves down.
    pub fn nearest_cell(&self) -> Pos {
        let round = |r: Ratio<i64>| (r - Ratio::new(1, 2)).ceil().to_integer();
        (round(self.y).max(0) as usize, round(self.x).max(0) as usize)
    }
}

/// Background-colored region enclosed inside an object's bounding box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cavity {
    pub pixels: Vec<Pos>,
    pub size: usize,
}

/// Coarse geometric class derived from an object's canonical shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeLabel {
    Cell,
    HorizontalBar,
    VerticalBar,
    Square,
    Rectangle,
    Frame,
    Plus,
    LShape,
    UShape,
    Irregular,
}

impl ShapeLabel {
    pub const ALL: [ShapeLabel; 10] = [
        ShapeLabel::Cell,
        ShapeLabel::HorizontalBar,
        ShapeLabel::VerticalBar,
        ShapeLabel::Square,
        ShapeLabel::Rectangle,
        ShapeLabel::Frame,
        ShapeLabel::Plus,
        ShapeLabel::LShape,
        ShapeLabel::UShape,
        ShapeLabel::Irregular,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ShapeLabel::Cell => "cell",
            ShapeLabel::HorizontalBar => "horizontal_bar",
            ShapeLabel::VerticalBar => "vertical_bar",
            ShapeLabel::Square => "square",
            ShapeLabel::Rectangle => "rectangle",
            ShapeLabel::Frame => "frame",
            ShapeLabel::Plus => "plus",
            ShapeLabel::LShape => "l_shape",
            ShapeLabel::UShape => "u_shape",
            ShapeLabel::Irregular => "irregular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }

    /// Classifies a canonical shape (offsets with minimum 0 on both axes).
    ///
    /// Precedence: cell, bars, solid square/rectangle, frame, plus, L, U,
    /// otherwise irregular.
    pub fn classify(shape: &[Pos], height: usize, width: usize) -> Self {
        let n = shape.len();
        if n == 1 {
            return ShapeLabel::Cell;
        }
        if height == 1 {
            return ShapeLabel::HorizontalBar;
        }
        if width == 1 {
            return ShapeLabel::VerticalBar;
        }
        if n == height * width {
            return if height == width { ShapeLabel::Square } else { ShapeLabel::Rectangle };
        }
        let mut mask = vec![false; height * width];
        for &(y, x) in shape {
            mask[y * width + x] = true;
        }
        let matches = |f: &dyn Fn(usize, usize) -> bool| {
            (0..height).all(|y| (0..width).all(|x| mask[y * width + x] == f(y, x)))
        };
        let perimeter = |y: usize, x: usize| y == 0 || x == 0 || y == height - 1 || x == width - 1;
        if height >= 3 && width >= 3 && matches(&perimeter) {
            return ShapeLabel::Frame;
        }
        if height == width && height % 2 == 1 && height >= 3 {
            let c = height / 2;
            if matches(&|y, x| y == c || x == c) {
                return ShapeLabel::Plus;
            }
        }
        for row in [0, height - 1] {
            for col in [0, width - 1] {
                if matches(&|y, x| y == row || x == col) {
                    return ShapeLabel::LShape;
                }
            }
        }
        if height >= 3 && width >= 3 {
            let open_top = |y: usize, x: usize| perimeter(y, x) && !(y == 0 && x > 0 && x < width - 1);
            let open_bottom =
                |y: usize, x: usize| perimeter(y, x) && !(y == height - 1 && x > 0 && x < width - 1);
            let open_left = |y: usize, x: usize| perimeter(y, x) && !(x == 0 && y > 0 && y < height - 1);
            let open_right =
                |y: usize, x: usize| perimeter(y, x) && !(x == width - 1 && y > 0 && y < height - 1);
            if matches(&open_top) || matches(&open_bottom) || matches(&open_left) || matches(&open_right) {
                return ShapeLabel::UShape;
            }
        }
        ShapeLabel::Irregular
    }
}

impl fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One connected component with its feature bundle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridObject {
    pub object_id: usize,
    /// Sorted row-major.
    pub pixels: Vec<Pixel>,
    pub bbox: BBox,
    pub height: usize,
    pub width: usize,
    pub centroid: Centroid,
    /// Sorted row-major.
    pub canonical_shape: Vec<Pos>,
    pub color_histogram: [usize; NUM_COLORS],
    pub cavities: Vec<Cavity>,
    pub shape_label: ShapeLabel,
}

impl GridObject {
    /// Builds the feature bundle for an arbitrary non-empty pixel list.
    /// Cavities are computed only when the source grid is supplied.
    ///
    /// Panics on an empty pixel list.
    pub fn from_pixels(object_id: usize, mut pixels: Vec<Pixel>, grid: Option<&Grid>, background: Color) -> Self {
        assert!(!pixels.is_empty(), "object without pixels");
        pixels.sort_unstable_by_key(|p| (p.y, p.x));
        let bbox = BBox::of(pixels.iter().map(Pixel::pos)).expect("non-empty");
        let n = pixels.len() as i64;
        let sum_y: i64 = pixels.iter().map(|p| p.y as i64).sum();
        let sum_x: i64 = pixels.iter().map(|p| p.x as i64).sum();
        let centroid = Centroid { y: Ratio::new(sum_y, n), x: Ratio::new(sum_x, n) };
        let canonical_shape: Vec<Pos> =
            pixels.iter().map(|p| (p.y - bbox.y_min, p.x - bbox.x_min)).collect();
        let mut color_histogram = [0; NUM_COLORS];
        for p in &pixels {
            color_histogram[p.color as usize] += 1;
        }
        let cavities = match grid {
            Some(g) => detect_cavities(&pixels, &bbox, g, background),
            None => Vec::new(),
        };
        let shape_label = ShapeLabel::classify(&canonical_shape, bbox.height(), bbox.width());
        GridObject {
            object_id,
            height: bbox.height(),
            width: bbox.width(),
            pixels,
            bbox,
            centroid,
            canonical_shape,
            color_histogram,
            cavities,
            shape_label,
        }
    }

    pub fn size(&self) -> usize {
        self.pixels.len()
    }

    /// Most frequent color; ties go to the lowest code.
    pub fn dominant_color(&self) -> Color {
        argmax_lowest(&self.color_histogram)
    }

    pub fn is_single_color(&self) -> bool {
        self.color_histogram.iter().filter(|&&c| c > 0).count() == 1
    }

    /// Midpoint of the bounding box, rounding down.
    pub fn bbox_midpoint(&self) -> Pos {
        ((self.bbox.y_min + self.bbox.y_max) / 2, (self.bbox.x_min + self.bbox.x_max) / 2)
    }
}

fn argmax_lowest(hist: &[usize; NUM_COLORS]) -> Color {
    let mut best = 0;
    for c in 1..NUM_COLORS {
        if hist[c] > hist[best] {
            best = c;
        }
    }
    best as Color
}

/// Background color plus objects in scan order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SceneGraph {
    pub background: Color,
    pub objects: Vec<GridObject>,
    pub source_dims: (usize, usize),
}

/// Most frequent color; ties go to the lowest code.
pub fn find_background(g: &Grid) -> Color {
    argmax_lowest(&g.histogram())
}

const NEIGHBORS_8: [(isize, isize); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

/// Maximal 8-connected components of non-background cells, discovered in
/// row-major order of their first cell; each listed in BFS order.
pub fn connected_components(g: &Grid, background: Color) -> Vec<Vec<Pos>> {
    let (h, w) = g.dims();
    let mut seen = vec![false; h * w];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for (y, x) in g.positions() {
        if seen[y * w + x] || g.get(y, x) == background {
            continue;
        }
        seen[y * w + x] = true;
        queue.push_back((y, x));
        let mut comp = Vec::new();
        while let Some((cy, cx)) = queue.pop_front() {
            comp.push((cy, cx));
            for (dy, dx) in NEIGHBORS_8 {
                let (ny, nx) = (cy as isize + dy, cx as isize + dx);
                if !g.contains(ny, nx) {
                    continue;
                }
                let (ny, nx) = (ny as usize, nx as usize);
                if !seen[ny * w + nx] && g.get(ny, nx) != background {
                    seen[ny * w + nx] = true;
                    queue.push_back((ny, nx));
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Builds the feature bundle of one component of `g`.
pub fn compute_features(object_id: usize, pixels: &[Pos], g: &Grid, background: Color) -> GridObject {
    let pixels = pixels.iter().map(|&(y, x)| Pixel::new(y, x, g.get(y, x))).collect();
    GridObject::from_pixels(object_id, pixels, Some(g), background)
}

/// Maximal 4-connected background regions inside `bbox` that never touch the
/// bounding-box perimeter.
pub fn detect_cavities(_object: &[Pixel], bbox: &BBox, g: &Grid, background: Color) -> Vec<Cavity> {
    if bbox.height() < 3 || bbox.width() < 3 {
        return Vec::new();
    }
    let (bh, bw) = (bbox.height(), bbox.width());
    let local = |y: usize, x: usize| (y - bbox.y_min) * bw + (x - bbox.x_min);
    let mut seen = vec![false; bh * bw];
    let mut cavities = Vec::new();
    let mut queue = VecDeque::new();
    for y in bbox.y_min..=bbox.y_max {
        for x in bbox.x_min..=bbox.x_max {
            if seen[local(y, x)] || g.get(y, x) != background {
                continue;
            }
            seen[local(y, x)] = true;
            queue.push_back((y, x));
            let mut region = Vec::new();
            let mut touches = false;
            while let Some((cy, cx)) = queue.pop_front() {
                region.push((cy, cx));
                touches |= bbox.on_border(cy, cx);
                for (dy, dx) in NEIGHBORS_4 {
                    let (ny, nx) = (cy as isize + dy, cx as isize + dx);
                    if ny < 0 || nx < 0 || !bbox.contains(ny as usize, nx as usize) {
                        continue;
                    }
                    let (ny, nx) = (ny as usize, nx as usize);
                    if !seen[local(ny, nx)] && g.get(ny, nx) == background {
                        seen[local(ny, nx)] = true;
                        queue.push_back((ny, nx));
                    }
                }
            }
            if !touches {
                region.sort_unstable();
                cavities.push(Cavity { size: region.len(), pixels: region });
            }
        }
    }
    cavities
}

pub fn abstract_scene(g: &Grid) -> SceneGraph {
    abstract_scene_with_background(g, find_background(g))
}

/// Abstraction with a caller-chosen background color.
pub fn abstract_scene_with_background(g: &Grid, background: Color) -> SceneGraph {
    let objects = connected_components(g, background)
        .iter()
        .enumerate()
        .map(|(i, comp)| compute_features(i, comp, g, background))
        .collect();
    SceneGraph { background, objects, source_dims: g.dims() }
}

#[derive(Debug, Clone, Serialize)]
struct ObjectExport<'a> {
    id: usize,
    color_histogram: &'a [usize; NUM_COLORS],
    bbox: &'a BBox,
    centroid: (f64, f64),
    canonical_shape: &'a [Pos],
    cavities: &'a [Cavity],
    shape_label: ShapeLabel,
}

#[derive(Debug, Clone, Serialize)]
struct SceneExport<'a> {
    background: Color,
    dims: (usize, usize),
    objects: Vec<ObjectExport<'a>>,
}

impl SceneGraph {
    /// JSON view of the scene used by the external proposer protocol.
    pub fn to_json(&self) -> serde_json::Value {
        let export = SceneExport {
            background: self.background,
            dims: self.source_dims,
            objects: self
                .objects
                .iter()
                .map(|o| ObjectExport {
                    id: o.object_id,
                    color_histogram: &o.color_histogram,
                    bbox: &o.bbox,
                    centroid: o.centroid.to_f64(),
                    canonical_shape: &o.canonical_shape,
                    cavities: &o.cavities,
                    shape_label: o.shape_label,
                })
                .collect(),
        };
        serde_json::to_value(export).expect("scene export is plain data")
    }

    /// Set of non-background cells covered by objects.
    pub fn occupied(&self) -> Vec<bool> {
        let (h, w) = self.source_dims;
        let mut m = vec![false; h * w];
        for o in &self.objects {
            for p in &o.pixels {
                if p.y < h && p.x < w {
                    m[p.y * w + p.x] = true;
                }
            }
        }
        m
    }
}
