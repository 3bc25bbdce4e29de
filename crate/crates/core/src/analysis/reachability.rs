use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ir::{assignments, eval_receptivity, Assignment, GrafcetNet, Marking, DEFAULT_VARIABLE_CAP};

pub const DEFAULT_STATE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub transition: usize,
    /// Values of the variables relevant at `from`; others are unconstrained.
    pub inputs: Assignment,
}

/// Markings reachable under interleaved single firings, in breadth-first
/// discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityGraph {
    pub markings: Vec<Marking>,
    pub edges: Vec<Edge>,
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    NotFlat,
    StateLimit(usize),
    TooManyVariables { marking: String, count: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::NotFlat => f.write_str("net contains macrosteps; flatten it first"),
            AnalysisError::StateLimit(n) => write!(f, "state space exceeds {n} markings"),
            AnalysisError::TooManyVariables { marking, count } => {
                write!(f, "{count} relevant inputs at marking {marking} exceed the enumeration cap")
            }
        }
    }
}

impl core::error::Error for AnalysisError {}

impl ReachabilityGraph {
    pub fn index_of(&self, m: &Marking) -> Option<usize> {
        self.markings.iter().position(|x| x == m)
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.index_of(m).is_some()
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == node)
    }
}

pub(crate) fn step_indices(net: &GrafcetNet, names: &[String]) -> Vec<usize> {
    names.iter().filter_map(|n| net.step_index(n)).collect()
}

/// Successor marking after firing one transition: pre-steps off, post-steps
/// on. Activation of an already-active step is idempotent.
pub fn fire_once(m: &Marking, pre: &[usize], post: &[usize]) -> Marking {
    let mut next = m.0.clone();
    for p in pre {
        next.remove(p);
    }
    next.extend(post.iter().copied());
    Marking(next)
}

/// Explores every marking reachable from the initial one. From each marking,
/// all assignments to the inputs read by enabled transitions are tried, and
/// each transition fireable under an assignment contributes one edge.
pub fn build_reachability(net: &GrafcetNet, limit: usize) -> Result<ReachabilityGraph, AnalysisError> {
    if !net.is_flat() {
        return Err(AnalysisError::NotFlat);
    }
    let arcs: Vec<(Vec<usize>, Vec<usize>)> =
        net.transitions.iter().map(|t| (step_indices(net, &t.pre), step_indices(net, &t.post))).collect();

    let initial = net.initial_marking();
    let mut index: BTreeMap<Marking, usize> = BTreeMap::new();
    let mut graph = ReachabilityGraph { markings: Vec::new(), edges: Vec::new(), initial: 0 };
    index.insert(initial.clone(), 0);
    graph.markings.push(initial);
    let mut queue = VecDeque::from([0usize]);

    while let Some(node) = queue.pop_front() {
        let m = graph.markings[node].clone();
        let enabled: Vec<usize> = (0..net.transitions.len()).filter(|&t| m.contains_all(&arcs[t].0)).collect();
        let mut vars: Vec<String> = Vec::new();
        for &t in &enabled {
            for v in net.transitions[t].receptivity.variables() {
                if !vars.iter().any(|x| x == v) {
                    vars.push(v.to_string());
                }
            }
        }
        vars.sort();
        if vars.len() > DEFAULT_VARIABLE_CAP {
            return Err(AnalysisError::TooManyVariables { marking: m.display(net).to_string(), count: vars.len() });
        }
        for a in assignments(&vars) {
            for &t in &enabled {
                // Relevant variables cover every enabled receptivity.
                if !eval_receptivity(&net.transitions[t].receptivity, &a).expect("bound") {
                    continue;
                }
                let next = fire_once(&m, &arcs[t].0, &arcs[t].1);
                let to = match index.get(&next) {
                    Some(&i) => i,
                    None => {
                        if graph.markings.len() >= limit {
                            return Err(AnalysisError::StateLimit(limit));
                        }
                        let i = graph.markings.len();
                        index.insert(next.clone(), i);
                        graph.markings.push(next);
                        queue.push_back(i);
                        i
                    }
                };
                graph.edges.push(Edge { from: node, to, transition: t, inputs: a.clone() });
            }
        }
    }
    Ok(graph)
}
