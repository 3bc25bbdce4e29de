//! The `check` report: structure, reachability, liveness and conflicts.

use grafcet_core::analysis::{
    build_reachability, detect_conflicts, liveness_report, AnalysisError, Classification, ConflictReport,
    LivenessReport, ReachabilityGraph,
};
use grafcet_core::ir::{Assignment, GrafcetNet, SatError, SatResult};
use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ConflictEntry {
    pub first: String,
    pub second: String,
    pub shared: Vec<String>,
    /// `equivalent`, `overlapping` or `disjoint`.
    pub relation: &'static str,
    pub reachable: bool,
    /// `parallel`, `exclusive` or `none`.
    pub rewrite: &'static str,
    /// An assignment making both receptivities true, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Assignment>,
}

impl ConflictEntry {
    pub fn is_conflict(&self) -> bool {
        self.reachable && self.rewrite != "none"
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Report {
    pub net: String,
    pub steps: usize,
    pub transitions: usize,
    pub markings: usize,
    pub edges: usize,
    pub deadlocks: Vec<String>,
    pub dead_transitions: Vec<String>,
    pub unsafe_activations: Vec<(String, String)>,
    pub pairs: Vec<ConflictEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

impl Report {
    pub fn conflicts(&self) -> impl Iterator<Item = &ConflictEntry> {
        self.pairs.iter().filter(|p| p.is_conflict())
    }

    pub fn is_live(&self) -> bool {
        self.deadlocks.is_empty() && self.dead_transitions.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "net {}: {} steps, {} transitions\nreachability: {} markings, {} edges\n",
            self.net, self.steps, self.transitions, self.markings, self.edges
        );
        let list = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(", ") };
        out += &format!("deadlocks: {}\n", list(&self.deadlocks));
        out += &format!("dead transitions: {}\n", list(&self.dead_transitions));
        let unsafe_text: Vec<String> = self.unsafe_activations.iter().map(|(m, t)| format!("{t} at {m}")).collect();
        out += &format!("unsafe activations: {}\n", list(&unsafe_text));
        let conflicts: Vec<&ConflictEntry> = self.conflicts().collect();
        out += &format!("conflicts: {}\n", conflicts.len());
        for p in &self.pairs {
            let mut line = format!("  {} / {} on {}: {}", p.first, p.second, p.shared.join(", "), p.relation);
            if let Some(w) = &p.witness {
                let vals: Vec<String> = w.iter().map(|(k, v)| format!("{k}={}", u8::from(*v))).collect();
                line += &format!(" (both hold at {})", vals.join(" "));
            }
            if p.is_conflict() {
                line += &format!("; warning: conflict, {} rewrite applies", p.rewrite);
            } else if !p.reachable {
                line += "; never co-enabled";
            }
            out += &line;
            out.push('\n');
        }
        out
    }
}

fn marking_text(net: &GrafcetNet, graph: &ReachabilityGraph, node: usize) -> String {
    graph.markings[node].display(net).to_string()
}

/// Runs the whole analysis suite on a flat net.
pub fn analyze(net: &GrafcetNet, state_limit: usize) -> Result<Report, ReportError> {
    let graph = build_reachability(net, state_limit)?;
    let conflicts: ConflictReport = detect_conflicts(net, &graph)?;
    let live: LivenessReport = liveness_report(net, &graph);
    let pairs = conflicts
        .pairs
        .iter()
        .map(|p| {
            let (relation, witness) = match &p.sat {
                SatResult::Equivalent => ("equivalent", None),
                SatResult::Overlapping { both, .. } => ("overlapping", Some(both.clone())),
                SatResult::Disjoint => ("disjoint", None),
            };
            let rewrite = match p.classification() {
                Classification::ParallelRewrite => "parallel",
                Classification::ExclusionRewrite => "exclusive",
                Classification::None => "none",
            };
            ConflictEntry {
                first: net.transitions[p.first].id.clone(),
                second: net.transitions[p.second].id.clone(),
                shared: p.shared.clone(),
                relation,
                reachable: p.reachable,
                rewrite,
                witness,
            }
        })
        .collect();
    Ok(Report {
        net: net.name.clone(),
        steps: net.steps.len(),
        transitions: net.transitions.len(),
        markings: graph.markings.len(),
        edges: graph.edges.len(),
        deadlocks: live.deadlock_markings.iter().map(|&m| marking_text(net, &graph, m)).collect(),
        dead_transitions: live.dead_transitions.iter().map(|&t| net.transitions[t].id.clone()).collect(),
        unsafe_activations: live
            .unsafe_activations
            .iter()
            .map(|&(m, t)| (marking_text(net, &graph, m), net.transitions[t].id.clone()))
            .collect(),
        pairs,
    })
}
