#![allow(dead_code)]

use std::path::PathBuf;

use grafcet::cli;
use grafcet::core::engine::{EventKind, TraceEvent};
use grafcet::core::frontend::parse_rules;
use grafcet::core::ir::{GrafcetNet, Hierarchy};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap()
}

pub fn corpus_net(name: &str) -> GrafcetNet {
    let stem = name.trim_end_matches(".gcf");
    parse_rules(stem, &corpus_text(name)).unwrap()
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in-process with an empty standard input.
pub fn grafcet(args: &[&str]) -> Outcome {
    grafcet_with_input(args, "")
}

pub fn grafcet_with_input(args: &[&str], input: &str) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut stdin = input.as_bytes();
    let argv = std::iter::once("grafcet").chain(args.iter().copied());
    let code = cli::run(argv, &mut stdin, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

/// `levels` nets chained through one macrostep each; the innermost is plain.
pub fn nested(levels: usize) -> Hierarchy {
    let mut nets = std::collections::BTreeMap::new();
    for k in 0..levels {
        let name = if k == 0 { "root".to_string() } else { format!("l{k}") };
        let text = if k + 1 < levels {
            let m = k + 1;
            format!(
                "Step p1 (in), M{m}, p3 (out)\nMacrostep M{m} -> \"l{m}\"\nTransition ta, tb, tc\nInput x{k}\n\
                 Output Y{k}\nMarking p1\nTransitions:\nta: p1 * x{k} |- @M{m}\ntb: M{m} |- @p3\n\
                 tc: p3 * !x{k} |- @p1\nSteps:\np3: |- Y{k}\n"
            )
        } else {
            format!(
                "Step p1 (in), p2 (out)\nTransition ta, tb\nInput x{k}\nOutput Y{k}\nMarking p1\nTransitions:\n\
                 ta: p1 * x{k} |- @p2\ntb: p2 * !x{k} |- @p1\nSteps:\np2: |- Y{k}\n"
            )
        };
        nets.insert(name.clone(), parse_rules(&name, &text).unwrap());
    }
    Hierarchy { root: "root".into(), nets }
}

/// Every marking the trace passes through, rebuilt from FIRE/DEACT/ACT.
pub fn visited_markings(trace: &[TraceEvent]) -> Vec<Vec<String>> {
    let mut current: std::collections::BTreeSet<String> = Default::default();
    let mut seen = Vec::new();
    let mut dirty = false;
    for e in trace {
        match &e.kind {
            EventKind::Act(s) => {
                current.insert(s.clone());
                dirty = true;
            }
            EventKind::Deact(s) => {
                current.remove(s);
                dirty = true;
            }
            EventKind::Warn(_) => {}
            _ => {
                if dirty {
                    seen.push(current.iter().cloned().collect());
                    dirty = false;
                }
            }
        }
    }
    if dirty {
        seen.push(current.iter().cloned().collect());
    }
    seen
}
