//! Symbolic solver for ARC-style grid puzzles.
//!
//! Grids are abstracted into object scenes, explained with short programs of
//! parameterized unit patterns, filtered for consistency across training
//! pairs, and turned into up to two test predictions.

pub mod consistency;
pub mod dsl;
pub mod grid;
pub mod harness;
pub mod hypothesis;
pub mod scene;
pub mod solution;
pub mod synth;
pub mod transport;

pub use grid::{grids_equal, parse_task, render, serialize_task, Color, Grid, Pair, ParseError, Pos, TaskRecord};
pub use scene::{abstract_scene, GridObject, SceneGraph};
