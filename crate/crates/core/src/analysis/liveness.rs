use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::reachability::{step_indices, ReachabilityGraph};
use crate::ir::GrafcetNet;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LivenessReport {
    /// Graph nodes with no fireable transition under any input.
    pub deadlock_markings: Vec<usize>,
    /// Transitions never fired in the reachable state space.
    pub dead_transitions: Vec<usize>,
    /// (marking, transition) where firing activates a step that is already
    /// active and not consumed by the firing.
    pub unsafe_activations: Vec<(usize, usize)>,
}

impl LivenessReport {
    pub fn is_clean(&self) -> bool {
        self.deadlock_markings.is_empty() && self.dead_transitions.is_empty() && self.unsafe_activations.is_empty()
    }
}

pub fn liveness_report(net: &GrafcetNet, graph: &ReachabilityGraph) -> LivenessReport {
    let with_exit: BTreeSet<usize> = graph.edges.iter().map(|e| e.from).collect();
    let fired: BTreeSet<usize> = graph.edges.iter().map(|e| e.transition).collect();
    let mut unsafe_activations = BTreeSet::new();
    for e in &graph.edges {
        let t = &net.transitions[e.transition];
        let pre = step_indices(net, &t.pre);
        let m = &graph.markings[e.from];
        if step_indices(net, &t.post).iter().any(|s| m.contains(*s) && !pre.contains(s)) {
            unsafe_activations.insert((e.from, e.transition));
        }
    }
    LivenessReport {
        deadlock_markings: (0..graph.markings.len()).filter(|n| !with_exit.contains(n)).collect(),
        dead_transitions: (0..net.transitions.len()).filter(|t| !fired.contains(t)).collect(),
        unsafe_activations: unsafe_activations.into_iter().collect(),
    }
}
