use serde::{Deserialize, Serialize};

use super::exec::{execute_step, CompiledStep};
use super::instance::PatternInstance;
use super::DslError;
use crate::grid::Grid;
use crate::scene::{abstract_scene, abstract_scene_with_background, SceneGraph};

/// A non-empty sequence of pattern instances applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<PatternInstance>", into = "Vec<PatternInstance>")]
pub struct Program {
    steps: Vec<PatternInstance>,
}

impl Program {
    pub fn new(steps: Vec<PatternInstance>) -> Result<Self, DslError> {
        if steps.is_empty() {
            return Err(DslError::EmptyProgram);
        }
        Ok(Self { steps })
    }

    pub fn single(step: PatternInstance) -> Self {
        Self { steps: vec![step] }
    }

    pub fn steps(&self) -> &[PatternInstance] {
        &self.steps
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Program) -> Program {
        Program { steps: self.steps.iter().chain(&other.steps).cloned().collect() }
    }

    /// Step canonical forms joined in order.
    pub fn canonical(&self) -> String {
        self.steps.iter().map(PatternInstance::canonical).collect::<Vec<_>>().join(" ; ")
    }
}

impl TryFrom<Vec<PatternInstance>> for Program {
    type Error = DslError;

    fn try_from(steps: Vec<PatternInstance>) -> Result<Self, DslError> {
        Program::new(steps)
    }
}

impl From<Program> for Vec<PatternInstance> {
    fn from(p: Program) -> Self {
        p.steps
    }
}

pub fn program_depth(p: &Program) -> usize {
    p.depth()
}

fn at(step: usize) -> impl Fn(DslError) -> DslError {
    move |e| DslError::AtStep { step, source: Box::new(e) }
}

/// Executes every step in order; a failure reports its zero-based step.
pub fn execute_program(program: &Program, scene: &SceneGraph) -> Result<SceneGraph, DslError> {
    let mut current = scene.clone();
    for (i, step) in program.steps.iter().enumerate() {
        current = execute_step(step, &current).map_err(at(i))?;
    }
    Ok(current)
}

/// Grid-level equivalent of abstracting `input`, running `program` and
/// rendering the result.
pub fn run_program(program: &Program, input: &Grid) -> Result<Grid, DslError> {
    let compiled: Vec<CompiledStep> =
        program.steps.iter().enumerate().map(|(i, s)| CompiledStep::new(s).map_err(at(i))).collect::<Result<_, _>>()?;
    let mut scene = abstract_scene(input);
    let background = scene.background;
    let mut canvas = input.clone();
    for (i, step) in compiled.iter().enumerate() {
        if i > 0 {
            scene = abstract_scene_with_background(&canvas, background);
        }
        canvas = step.apply(&scene, &canvas).map_err(at(i))?;
    }
    Ok(canvas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Bindings, Selector};
    use crate::grid::render;

    fn fill_right() -> PatternInstance {
        PatternInstance::new("Horizontal Fill")
            .param("column_index", "right of an object")
            .param("stop_condition", "grid boundary")
            .bind(Bindings::source(Selector::All))
    }

    fn recolor(c: u8) -> PatternInstance {
        PatternInstance::new("Find Objects in the Input Image and Color Them")
            .param("new_color", "constant throughout")
            .bind(Bindings::source(Selector::All).with_color(c))
    }

    #[test]
    fn empty_program_rejected() {
        assert_eq!(Program::new(vec![]), Err(DslError::EmptyProgram));
        assert!(serde_json::from_str::<Program>("[]").is_err());
    }

    #[test]
    fn composition_and_grid_path_agree() {
        let g = Grid::from_rows(&[[0u8, 0, 0], [4, 0, 0], [0, 0, 0]]).unwrap();
        let p = Program::new(vec![fill_right(), recolor(2)]).unwrap();
        let scene = abstract_scene(&g);
        let out = execute_program(&p, &scene).unwrap();
        let rendered = render(&out, 3, 3).unwrap();
        assert_eq!(rendered, Grid::from_rows(&[[0u8, 0, 0], [2, 2, 2], [0, 0, 0]]).unwrap());
        assert_eq!(run_program(&p, &g).unwrap(), rendered);

        let first = execute_program(&Program::single(fill_right()), &scene).unwrap();
        let second = execute_program(&Program::single(recolor(2)), &first).unwrap();
        assert_eq!(second, out);
        assert_eq!(p.depth(), 2);
        assert_eq!(Program::single(fill_right()).then(&Program::single(recolor(2))), p);
    }

    #[test]
    fn failing_step_is_tagged() {
        let g = Grid::from_rows(&[[1u8, 0]]).unwrap();
        let bad = PatternInstance::new("Cavity Fill").bind(Bindings::source(Selector::Color(7)).with_color(1));
        let p = Program::new(vec![recolor(3), bad]).unwrap();
        let err = execute_program(&p, &abstract_scene(&g)).unwrap_err();
        assert!(matches!(err, DslError::AtStep { step: 1, .. }));
        assert!(matches!(err.root(), DslError::BindingResolutionFailed(_)));
        assert_eq!(run_program(&p, &g).unwrap_err(), err);
    }
}
