//! In-memory representation of grafcets and receptivity semantics.

mod expr;
mod hierarchy;
mod net;
mod validate;

pub use expr::{
    assignments, eval_receptivity, receptivities_cosatisfiable, Assignment, EvalError, Expr, Operators, SatError,
    SatResult, DEFAULT_VARIABLE_CAP, RULE_OPERATORS,
};
pub use hierarchy::{Hierarchy, HierarchyError, LoadError};
pub use net::{is_identifier, GrafcetNet, Marking, MarkingDisplay, Step, Transition};
pub use validate::{validate_structure, Invariant, Violation};
