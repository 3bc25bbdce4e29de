//! Formal validation: reachability, liveness and safeness reporting, and
//! structural conflict detection.

mod conflicts;
mod liveness;
mod reachability;

pub use conflicts::{detect_conflicts, Classification, ConflictPair, ConflictReport};
pub use liveness::{liveness_report, LivenessReport};
pub use reachability::{build_reachability, fire_once, AnalysisError, Edge, ReachabilityGraph, DEFAULT_STATE_LIMIT};
