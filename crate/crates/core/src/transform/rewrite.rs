use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{build_reachability, detect_conflicts, AnalysisError, Classification};
use crate::ir::{receptivities_cosatisfiable, Expr, GrafcetNet, SatError, SatResult, Transition, DEFAULT_VARIABLE_CAP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteError {
    UnknownTransition(String),
    NotEquivalent { first: String, second: String },
    NoConflict { first: String, second: String },
    Equivalent { first: String, second: String },
    PreSetsDiffer { first: String, second: String },
    Analysis(AnalysisError),
    Sat(SatError),
    NoProgress(usize),
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::UnknownTransition(t) => write!(f, "unknown transition {t}"),
            RewriteError::NotEquivalent { first, second } => {
                write!(f, "receptivities of {first} and {second} are not equivalent")
            }
            RewriteError::NoConflict { first, second } => {
                write!(f, "{first} and {second} are mutually exclusive: no conflict to eliminate")
            }
            RewriteError::Equivalent { first, second } => {
                write!(f, "{first} and {second} have equivalent receptivities; use the parallel rewrite")
            }
            RewriteError::PreSetsDiffer { first, second } => {
                write!(f, "{first} and {second} do not have the same pre-steps")
            }
            RewriteError::Analysis(e) => e.fmt(f),
            RewriteError::Sat(e) => e.fmt(f),
            RewriteError::NoProgress(n) => write!(f, "conflicts remain after {n} rewrite passes"),
        }
    }
}

impl core::error::Error for RewriteError {}

impl From<AnalysisError> for RewriteError {
    fn from(e: AnalysisError) -> Self {
        RewriteError::Analysis(e)
    }
}

impl From<SatError> for RewriteError {
    fn from(e: SatError) -> Self {
        RewriteError::Sat(e)
    }
}

fn pair_indices(net: &GrafcetNet, first: &str, second: &str) -> Result<(usize, usize), RewriteError> {
    let a = net.transition_index(first).ok_or_else(|| RewriteError::UnknownTransition(first.into()))?;
    let b = net.transition_index(second).ok_or_else(|| RewriteError::UnknownTransition(second.into()))?;
    Ok(if a < b { (a, b) } else { (b, a) })
}

/// Union of step lists, ordered as the steps are declared.
fn union_steps(net: &GrafcetNet, a: &[String], b: &[String]) -> Vec<String> {
    net.steps.iter().filter(|s| a.contains(&s.id) || b.contains(&s.id)).map(|s| s.id.clone()).collect()
}

fn same_set(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

/// Merges two transitions with equivalent receptivities into a single fork:
/// pre and post are the unions of the pair's sets, the receptivity is kept.
/// The merged transition takes the place and name of the earlier one.
pub fn rewrite_parallel(net: &GrafcetNet, first: &str, second: &str) -> Result<GrafcetNet, RewriteError> {
    let (i, j) = pair_indices(net, first, second)?;
    let (ti, tj) = (&net.transitions[i], &net.transitions[j]);
    let sat = receptivities_cosatisfiable(&ti.receptivity, &tj.receptivity, DEFAULT_VARIABLE_CAP)?;
    if sat != SatResult::Equivalent {
        return Err(RewriteError::NotEquivalent { first: ti.id.clone(), second: tj.id.clone() });
    }
    let merged = Transition {
        id: ti.id.clone(),
        pre: union_steps(net, &ti.pre, &tj.pre),
        post: union_steps(net, &ti.post, &tj.post),
        receptivity: ti.receptivity.clone(),
    };
    let mut out = net.clone();
    out.transitions[i] = merged;
    out.transitions.remove(j);
    Ok(out)
}

fn fresh_transition_id(net: &GrafcetNet, base: &str) -> String {
    if net.transition(base).is_none() {
        return base.into();
    }
    (2..).map(|k| format!("{base}_{k}")).find(|c| net.transition(c).is_none()).unwrap()
}

/// Replaces an overlapping pair `r1 -> post1`, `r2 -> post2` by three
/// mutually exclusive transitions from the shared pre-set:
/// `r1 * !r2 -> post1`, `!r1 * r2 -> post2` and `r1 * r2 -> post1 + post2`.
/// The third is named `<first>_<second>` and placed right after the second.
pub fn rewrite_exclusive(net: &GrafcetNet, first: &str, second: &str) -> Result<GrafcetNet, RewriteError> {
    let (i, j) = pair_indices(net, first, second)?;
    let (ti, tj) = (&net.transitions[i], &net.transitions[j]);
    let names = || (ti.id.clone(), tj.id.clone());
    match receptivities_cosatisfiable(&ti.receptivity, &tj.receptivity, DEFAULT_VARIABLE_CAP)? {
        SatResult::Overlapping { .. } => {}
        SatResult::Disjoint => {
            let (first, second) = names();
            return Err(RewriteError::NoConflict { first, second });
        }
        SatResult::Equivalent => {
            let (first, second) = names();
            return Err(RewriteError::Equivalent { first, second });
        }
    }
    if !same_set(&ti.pre, &tj.pre) {
        let (first, second) = names();
        return Err(RewriteError::PreSetsDiffer { first, second });
    }
    let (r1, r2) = (&ti.receptivity, &tj.receptivity);
    let both = Transition {
        id: fresh_transition_id(net, &format!("{}_{}", ti.id, tj.id)),
        pre: ti.pre.clone(),
        post: union_steps(net, &ti.post, &tj.post),
        receptivity: Expr::And(vec![r1.clone(), r2.clone()]),
    };
    let only_first = Transition { receptivity: Expr::And(vec![r1.clone(), Expr::not(r2.clone())]), ..ti.clone() };
    let only_second = Transition { receptivity: Expr::And(vec![Expr::not(r1.clone()), r2.clone()]), ..tj.clone() };
    let mut out = net.clone();
    out.transitions[i] = only_first;
    out.transitions[j] = only_second;
    out.transitions.insert(j + 1, both);
    Ok(out)
}

/// Which conflict classes [`fix_conflicts`] rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixMode {
    Parallel,
    Exclusive,
    /// Each pair by its own classification.
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedRewrite {
    pub first: String,
    pub second: String,
    pub classification: Classification,
}

/// Repeatedly rewrites the first eligible reachable conflict, re-running the
/// analysis after every rewrite, until none is left. Pairs whose pre-sets
/// differ are left alone for the exclusive rewrite.
pub fn fix_conflicts(
    net: &GrafcetNet,
    mode: FixMode,
    state_limit: usize,
    max_passes: usize,
) -> Result<(GrafcetNet, Vec<AppliedRewrite>), RewriteError> {
    let mut current = net.clone();
    let mut applied = Vec::new();
    for _ in 0..max_passes {
        let graph = build_reachability(&current, state_limit)?;
        let report = detect_conflicts(&current, &graph)?;
        let next = report.conflicts().find(|p| match p.classification() {
            Classification::ParallelRewrite => mode != FixMode::Exclusive,
            Classification::ExclusionRewrite => {
                mode != FixMode::Parallel
                    && same_set(&current.transitions[p.first].pre, &current.transitions[p.second].pre)
            }
            Classification::None => false,
        });
        let Some(pair) = next else {
            return Ok((current, applied));
        };
        let first = current.transitions[pair.first].id.clone();
        let second = current.transitions[pair.second].id.clone();
        let classification = pair.classification();
        current = match classification {
            Classification::ParallelRewrite => rewrite_parallel(&current, &first, &second)?,
            _ => rewrite_exclusive(&current, &first, &second)?,
        };
        applied.push(AppliedRewrite { first, second, classification });
    }
    Err(RewriteError::NoProgress(max_passes))
}
