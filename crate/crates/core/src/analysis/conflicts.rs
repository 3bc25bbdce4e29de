use alloc::string::String;
use alloc::vec::Vec;

use super::reachability::{step_indices, ReachabilityGraph};
use crate::ir::{receptivities_cosatisfiable, GrafcetNet, SatError, SatResult, DEFAULT_VARIABLE_CAP};

/// Suggested rewrite for a pair of transitions sharing a pre-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Same receptivity: the branches are parallel activities.
    ParallelRewrite,
    /// Receptivities can hold together: make them mutually exclusive.
    ExclusionRewrite,
    /// Receptivities never hold together.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictPair {
    /// Transition indices, first < second.
    pub first: usize,
    pub second: usize,
    pub shared: Vec<String>,
    pub sat: SatResult,
    /// Some reachable marking enables both transitions.
    pub reachable: bool,
}

impl ConflictPair {
    pub fn classification(&self) -> Classification {
        match self.sat {
            SatResult::Equivalent => Classification::ParallelRewrite,
            SatResult::Overlapping { .. } => Classification::ExclusionRewrite,
            SatResult::Disjoint => Classification::None,
        }
    }

    /// A genuine conflict: co-enabled in some reachable marking and not
    /// separated by the receptivities.
    pub fn is_conflict(&self) -> bool {
        self.reachable && self.classification() != Classification::None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictReport {
    /// Every pair of transitions sharing a pre-step, informational ones
    /// included.
    pub pairs: Vec<ConflictPair>,
}

impl ConflictReport {
    pub fn conflicts(&self) -> impl Iterator<Item = &ConflictPair> {
        self.pairs.iter().filter(|p| p.is_conflict())
    }
}

/// Examines every transition pair with a common pre-step.
pub fn detect_conflicts(net: &GrafcetNet, graph: &ReachabilityGraph) -> Result<ConflictReport, SatError> {
    let mut report = ConflictReport::default();
    let pres: Vec<Vec<usize>> = net.transitions.iter().map(|t| step_indices(net, &t.pre)).collect();
    for i in 0..net.transitions.len() {
        for j in i + 1..net.transitions.len() {
            let (ti, tj) = (&net.transitions[i], &net.transitions[j]);
            let shared: Vec<String> = ti.pre.iter().filter(|s| tj.pre.contains(s)).cloned().collect();
            if shared.is_empty() {
                continue;
            }
            let sat = receptivities_cosatisfiable(&ti.receptivity, &tj.receptivity, DEFAULT_VARIABLE_CAP)?;
            let reachable = graph.markings.iter().any(|m| m.contains_all(&pres[i]) && m.contains_all(&pres[j]));
            report.pairs.push(ConflictPair { first: i, second: j, shared, sat, reachable });
        }
    }
    Ok(report)
}
