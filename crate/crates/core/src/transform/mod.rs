//! Correctness-oriented rewrites: conflict elimination and macrostep
//! flattening.

mod flatten;
mod rewrite;

pub use flatten::{flatten, FlattenError};
pub use rewrite::{fix_conflicts, rewrite_exclusive, rewrite_parallel, AppliedRewrite, FixMode, RewriteError};
