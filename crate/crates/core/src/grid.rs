//! Grids, ARC task files and rendering of scene graphs back to grids.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::scene::SceneGraph;

/// A color code in `0..=9`.
pub type Color = u8;

/// `(row, column)` with the origin at the top-left cell.
pub type Pos = (usize, usize);

pub const NUM_COLORS: usize = 10;
pub const MAX_DIM: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid has no cells")]
    EmptyGrid,
    #[error("grid is {height}x{width}, larger than {MAX_DIM}x{MAX_DIM}")]
    TooLarge { height: usize, width: usize },
    #[error("color {0} is outside the palette 0-9")]
    ColorOutOfRange(i64),
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("row {row} has {len} cells, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
}

/// Dense row-major grid of color codes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<Color>,
}

/// One row per line, one digit per cell.
impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..self.height() {
            if y > 0 {
                writeln!(f)?;
            }
            for x in 0..self.width() {
                write!(f, "{}", self.get(y, x))?;
            }
        }
        Ok(())
    }
}

impl Grid {
    pub fn new(height: usize, width: usize, cells: Vec<Color>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if cells.len() != height * width {
            return Err(GridError::CellCount { expected: height * width, actual: cells.len() });
        }
        if let Some(&c) = cells.iter().find(|&&c| c as usize >= NUM_COLORS) {
            return Err(GridError::ColorOutOfRange(c as i64));
        }
        Ok(Self { height, width, cells })
    }

    pub fn filled(height: usize, width: usize, color: Color) -> Result<Self, GridError> {
        Self::new(height, width, vec![color; height * width])
    }

    pub fn from_rows<R: AsRef<[Color]>>(rows: &[R]) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        check_dims(height, width)?;
        let mut cells = Vec::with_capacity(height * width);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != width {
                return Err(GridError::RaggedRow { row, len: r.len(), expected: width });
            }
            cells.extend_from_slice(r);
        }
        Self::new(height, width, cells)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> Color {
        self.cells[y * self.width + x]
    }

    /// Bounds-checked lookup with signed coordinates.
    #[inline]
    pub fn get_signed(&self, y: isize, x: isize) -> Option<Color> {
        if self.contains(y, x) {
            Some(self.cells[y as usize * self.width + x as usize])
        } else {
            None
        }
    }

    #[inline]
    pub fn contains(&self, y: isize, x: isize) -> bool {
        y >= 0 && x >= 0 && (y as usize) < self.height && (x as usize) < self.width
    }

    /// Panics when `color` is not a palette color or the cell is out of range.
    #[inline]
    pub fn set(&mut self, y: usize, x: usize, color: Color) {
        assert!((color as usize) < NUM_COLORS, "color {color} outside palette");
        self.cells[y * self.width + x] = color;
    }

    pub fn rows(&self) -> Vec<Vec<Color>> {
        self.cells.chunks(self.width).map(<[Color]>::to_vec).collect()
    }

    /// Per-color pixel counts.
    pub fn histogram(&self) -> [usize; NUM_COLORS] {
        let mut h = [0; NUM_COLORS];
        for &c in &self.cells {
            h[c as usize] += 1;
        }
        h
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (y, x)))
    }

    /// Number of cells at which two same-sized grids differ.
    pub fn diff_count(&self, other: &Grid) -> Option<usize> {
        (self.dims() == other.dims())
            .then(|| self.cells.iter().zip(&other.cells).filter(|(a, b)| a != b).count())
    }

    /// Rows separated by newlines, one digit per cell.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.height * (self.width + 1));
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|&c| char::from(b'0' + c)));
            out.push('\n');
        }
        out
    }
}

fn check_dims(height: usize, width: usize) -> Result<(), GridError> {
    if height == 0 || width == 0 {
        return Err(GridError::EmptyGrid);
    }
    if height > MAX_DIM || width > MAX_DIM {
        return Err(GridError::TooLarge { height, width });
    }
    Ok(())
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid {}x{}", self.height, self.width)?;
        f.write_str(&self.to_ascii())
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.height))?;
        for row in self.cells.chunks(self.width) {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        grid_from_value(&value).map_err(de::Error::custom)
    }
}

/// True iff dimensions and every cell match.
pub fn grids_equal(a: &Grid, b: &Grid) -> bool {
    a.height == b.height && a.width == b.width && a.cells == b.cells
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("object pixel ({y}, {x}) lies outside a {height}x{width} frame")]
pub struct PixelOutOfBounds {
    pub y: usize,
    pub x: usize,
    pub height: usize,
    pub width: usize,
}

/// Paints the background, then every object in list order. Later objects
/// overwrite earlier ones where they overlap.
pub fn render(scene: &SceneGraph, height: usize, width: usize) -> Result<Grid, PixelOutOfBounds> {
    let mut cells = vec![scene.background; height * width];
    for obj in &scene.objects {
        for p in &obj.pixels {
            if p.y >= height || p.x >= width {
                return Err(PixelOutOfBounds { y: p.y, x: p.x, height, width });
            }
            cells[p.y * width + p.x] = p.color;
        }
    }
    Ok(Grid { height, width, cells })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub input: Grid,
    pub output: Grid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRecord {
    pub task_id: String,
    pub train_pairs: Vec<Pair>,
    pub test_inputs: Vec<Grid>,
    pub test_outputs: Option<Vec<Grid>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("color {value} at {path} is outside the palette 0-9")]
    ColorOutOfRange { path: String, value: i64 },
    #[error("empty grid at {0}")]
    EmptyGrid(String),
    #[error("grid at {path} is {height}x{width}, larger than {MAX_DIM}x{MAX_DIM}")]
    GridTooLarge { path: String, height: usize, width: usize },
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> ParseError {
    ParseError::SchemaViolation { path: path.into(), reason: reason.into() }
}

/// Parses a task in the public ARC JSON format.
pub fn parse_task(task_id: &str, raw: &[u8]) -> Result<TaskRecord, ParseError> {
    let value: Value =
        serde_json::from_slice(raw).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    task_from_value(task_id, &value)
}

pub(crate) fn task_from_value(task_id: &str, value: &Value) -> Result<TaskRecord, ParseError> {
    let root = value.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let train = root
        .get("train")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("$.train", "missing or not a list"))?;
    let test = root
        .get("test")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("$.test", "missing or not a list"))?;
    if train.is_empty() {
        return Err(schema("$.train", "no training pairs"));
    }

    let mut train_pairs = Vec::with_capacity(train.len());
    for (i, entry) in train.iter().enumerate() {
        let path = format!("$.train[{i}]");
        let input = entry_grid(entry, "input", &path)?
            .ok_or_else(|| schema(&path, "missing \"input\""))?;
        let output = entry_grid(entry, "output", &path)?
            .ok_or_else(|| schema(&path, "missing \"output\""))?;
        train_pairs.push(Pair { input, output });
    }

    let mut test_inputs = Vec::with_capacity(test.len());
    let mut outputs = Vec::new();
    for (i, entry) in test.iter().enumerate() {
        let path = format!("$.test[{i}]");
        test_inputs.push(
            entry_grid(entry, "input", &path)?.ok_or_else(|| schema(&path, "missing \"input\""))?,
        );
        if let Some(g) = entry_grid(entry, "output", &path)? {
            outputs.push(g);
        }
    }
    let test_outputs = match outputs.len() {
        0 => None,
        n if n == test_inputs.len() => Some(outputs),
        _ => return Err(schema("$.test", "some but not all test entries carry an output")),
    };

    Ok(TaskRecord { task_id: task_id.to_string(), train_pairs, test_inputs, test_outputs })
}

fn entry_grid(entry: &Value, key: &str, path: &str) -> Result<Option<Grid>, ParseError> {
    let obj = entry.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    match obj.get(key) {
        None => Ok(None),
        Some(v) => grid_from_value_at(v, &format!("{path}.{key}")).map(Some),
    }
}

fn grid_from_value(value: &Value) -> Result<Grid, ParseError> {
    grid_from_value_at(value, "$")
}

fn grid_from_value_at(value: &Value, path: &str) -> Result<Grid, ParseError> {
    let rows = value.as_array().ok_or_else(|| schema(path, "expected a list of rows"))?;
    if rows.is_empty() {
        return Err(ParseError::EmptyGrid(path.to_string()));
    }
    let mut width = None;
    let mut cells = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| schema(format!("{path}[{y}]"), "expected a list of integers"))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(schema(format!("{path}[{y}]"), format!("ragged row: {} vs {w}", row.len())))
            }
            _ => {}
        }
        for (x, cell) in row.iter().enumerate() {
            let at = || format!("{path}[{y}][{x}]");
            let v = cell.as_i64().ok_or_else(|| schema(at(), "expected an integer"))?;
            if !(0..NUM_COLORS as i64).contains(&v) {
                return Err(ParseError::ColorOutOfRange { path: at(), value: v });
            }
            cells.push(v as Color);
        }
    }
    let height = rows.len();
    let width = width.unwrap_or(0);
    if width == 0 {
        return Err(ParseError::EmptyGrid(path.to_string()));
    }
    if height > MAX_DIM || width > MAX_DIM {
        return Err(ParseError::GridTooLarge { path: path.to_string(), height, width });
    }
    Ok(Grid { height, width, cells })
}

fn grid_value(g: &Grid) -> Value {
    Value::Array(
        g.cells
            .chunks(g.width)
            .map(|r| Value::Array(r.iter().map(|&c| Value::from(c)).collect()))
            .collect(),
    )
}

/// Compact JSON with sorted keys. Output bytes depend only on the record.
pub fn serialize_task(task: &TaskRecord) -> Vec<u8> {
    let pair = |input: &Grid, output: Option<&Grid>| {
        let mut m = Map::new();
        m.insert("input".into(), grid_value(input));
        if let Some(o) = output {
            m.insert("output".into(), grid_value(o));
        }
        Value::Object(m)
    };
    let train = task.train_pairs.iter().map(|p| pair(&p.input, Some(&p.output))).collect();
    let test = task
        .test_inputs
        .iter()
        .enumerate()
        .map(|(i, g)| pair(g, task.test_outputs.as_ref().map(|o| &o[i])))
        .collect();
    let mut root = Map::new();
    root.insert("test".into(), Value::Array(test));
    root.insert("train".into(), Value::Array(train));
    serde_json::to_vec(&Value::Object(root)).expect("in-memory JSON serialization")
}
