//! Executable semantics: the I/D/F/W loop over flat nets and macrostep
//! hierarchies, with P/T scheduling, task budgets and a line-oriented trace.

mod model;
mod run;
mod source;
mod trace;

pub use model::{Grafcet, Model, ModelError, ModelStep, ModelTransition};
pub use run::{run, Engine, EngineConfig, EngineError, SchedulingPolicy, DEFAULT_DIVERGENCE_CAP};
pub use source::{Batch, EventSource, ScriptSource};
pub use trace::{render_trace, EventKind, MacroStatus, TraceEvent};

#[cfg(test)]
mod tests;
