//! The unit-pattern language: schemas, instances, programs and execution.

mod exec;
mod instance;
mod program;
mod registry;

use thiserror::Error;

pub use exec::{complement, execute_step, CompiledStep};
pub use instance::{required_roles, validate_instance, Bindings, PatternInstance, Selector};
pub use program::{execute_program, program_depth, run_program, Program};
pub use registry::{lookup, registry, ParamSpec, Pattern, PatternSchema, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("illegal value {value:?} for parameter {name:?}")]
    IllegalParameter { name: String, value: String },
    #[error("missing {0} binding")]
    MissingBinding(Role),
    #[error("pattern {0:?} is hint-only and cannot be executed")]
    NotExecutable(String),
    #[error("binding resolution failed: {0}")]
    BindingResolutionFailed(String),
    #[error("semantics violation: {0}")]
    SemanticsViolation(String),
    #[error("a program needs at least one step")]
    EmptyProgram,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<DslError>,
    },
}

impl DslError {
    /// The underlying error, without step tagging.
    pub fn root(&self) -> &DslError {
        match self {
            DslError::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
