//! The structured graph dialect (`.gcg`): a JSON tree with explicit step and
//! transition records and one record per arc.

use std::collections::BTreeMap;

use grafcet_core::frontend::{parse_receptivity, Diagnostic};
use grafcet_core::ir::{validate_structure, GrafcetNet, Step, Transition};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    net: Option<NetRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetRecord {
    name: String,
    steps: Vec<StepRecord>,
    transitions: Vec<TransitionRecord>,
    arcs: Vec<ArcRecord>,
    #[serde(default)]
    inputs: Vec<String>,
    #[serde(default)]
    outputs: Vec<String>,
    marking: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRecord {
    id: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    priority: u32,
    #[serde(default, skip_serializing_if = "is_false")]
    input: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    output: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tasks: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    macrostep: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRecord {
    id: String,
    receptivity: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum ArcRecord {
    StepToTransition { step: String, transition: String },
    TransitionToStep { transition: String, step: String },
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

fn is_false(v: &bool) -> bool {
    !*v
}

/// Position of the first `"name"` string in `text`, for diagnostics raised
/// after deserialization.
fn locate(text: &str, name: &str) -> (usize, usize) {
    let needle = format!("\"{name}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.find(&needle) {
            return (i + 1, line[..c].chars().count() + 1);
        }
    }
    (1, 1)
}

pub fn parse_graph(text: &str) -> Result<GrafcetNet, Vec<Diagnostic>> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        let (line, column) = if e.line() == 0 { (1, 1) } else { (e.line(), e.column().max(1)) };
        vec![Diagnostic::error(line, column, e.to_string())]
    })?;
    let Some(rec) = doc.net else {
        return Err(vec![Diagnostic::error(1, 1, "missing net object")]);
    };
    let mut net = GrafcetNet::new(rec.name);
    net.inputs = rec.inputs;
    net.outputs = rec.outputs;
    net.initial = rec.marking;
    for s in rec.steps {
        if let Some(link) = s.macrostep {
            net.macrosteps.insert(s.id.clone(), link);
        }
        let mut step = Step::new(s.id).with_priority(s.priority).with_tasks(s.tasks);
        step.entry = s.input;
        step.exit = s.output;
        net.steps.push(step);
    }
    let mut diags = Vec::new();
    let mut index = BTreeMap::new();
    for t in rec.transitions {
        let receptivity = match parse_receptivity(&t.receptivity, &net.inputs) {
            Ok(e) => e,
            Err(d) => {
                let (line, col) = locate(text, &t.receptivity);
                diags.push(Diagnostic::error(line, col + d.column, format!("transition {}: {}", t.id, d.message)));
                continue;
            }
        };
        index.insert(t.id.clone(), net.transitions.len());
        net.transitions.push(Transition { id: t.id, pre: Vec::new(), post: Vec::new(), receptivity });
    }
    for arc in rec.arcs {
        let (t, step, pre) = match arc {
            ArcRecord::StepToTransition { step, transition } => (transition, step, true),
            ArcRecord::TransitionToStep { transition, step } => (transition, step, false),
        };
        let Some(&i) = index.get(&t) else {
            let (line, col) = locate(text, &t);
            diags.push(Diagnostic::error(line, col, format!("arc refers to unknown transition {t}")));
            continue;
        };
        let tr = &mut net.transitions[i];
        if pre {
            tr.pre.push(step)
        } else {
            tr.post.push(step)
        }
    }
    for v in validate_structure(&net) {
        let (line, col) = locate(text, &v.subject);
        diags.push(Diagnostic::error(line, col, v.to_string()));
    }
    if diags.is_empty() {
        Ok(net)
    } else {
        Err(diags)
    }
}

/// Pretty-printed document, steps and transitions in declaration order and
/// each transition's input arcs before its output arcs.
pub fn serialize_graph(net: &GrafcetNet) -> String {
    let steps = net
        .steps
        .iter()
        .map(|s| StepRecord {
            id: s.id.clone(),
            priority: s.priority,
            input: s.entry,
            output: s.exit,
            tasks: s.tasks.clone(),
            macrostep: net.macrosteps.get(&s.id).cloned(),
        })
        .collect();
    let transitions = net
        .transitions
        .iter()
        .map(|t| TransitionRecord { id: t.id.clone(), receptivity: t.receptivity.to_string() })
        .collect();
    let mut arcs = Vec::new();
    for t in &net.transitions {
        for s in &t.pre {
            arcs.push(ArcRecord::StepToTransition { step: s.clone(), transition: t.id.clone() });
        }
        for s in &t.post {
            arcs.push(ArcRecord::TransitionToStep { transition: t.id.clone(), step: s.clone() });
        }
    }
    let doc = Document {
        net: Some(NetRecord {
            name: net.name.clone(),
            steps,
            transitions,
            arcs,
            inputs: net.inputs.clone(),
            outputs: net.outputs.clone(),
            marking: net.initial.clone(),
        }),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("graph documents serialize");
    text.push('\n');
    text
}
