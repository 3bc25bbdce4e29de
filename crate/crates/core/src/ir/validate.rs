//! Structural well-formedness of a single net.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::net::{is_identifier, GrafcetNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Invariant {
    NoSteps,
    NoTransitions,
    BadIdentifier,
    DuplicateStep,
    DuplicateTransition,
    DuplicateInput,
    DuplicateOutput,
    StepInputClash,
    UnknownStep,
    EmptyPreSet,
    EmptyPostSet,
    RepeatedArc,
    UnknownInput,
    UnknownOutput,
    EmptyTask,
    EmptyMarking,
    UnknownMarkedStep,
    RepeatedMarking,
    UnknownMacrostep,
    MacrostepWithActions,
}

/// One violated invariant together with the offending identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: Invariant,
    pub subject: String,
    /// Owning element, when the subject alone is ambiguous.
    pub context: Option<String>,
}

impl Violation {
    fn new(invariant: Invariant, subject: &str) -> Violation {
        Violation { invariant, subject: subject.to_string(), context: None }
    }

    fn within(invariant: Invariant, subject: &str, context: &str) -> Violation {
        Violation { invariant, subject: subject.to_string(), context: Some(context.to_string()) }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.subject;
        match self.invariant {
            Invariant::NoSteps => write!(f, "no steps"),
            Invariant::NoTransitions => write!(f, "no transitions"),
            Invariant::BadIdentifier => write!(f, "invalid identifier {s:?}"),
            Invariant::DuplicateStep => write!(f, "duplicate step {s}"),
            Invariant::DuplicateTransition => write!(f, "duplicate transition {s}"),
            Invariant::DuplicateInput => write!(f, "duplicate input {s}"),
            Invariant::DuplicateOutput => write!(f, "duplicate output {s}"),
            Invariant::StepInputClash => write!(f, "{s} is declared both as step and as input"),
            Invariant::UnknownStep => write!(f, "unknown step {s}"),
            Invariant::EmptyPreSet => write!(f, "transition {s} has no pre-step"),
            Invariant::EmptyPostSet => write!(f, "transition {s} has no post-step"),
            Invariant::RepeatedArc => write!(f, "step {s} repeated in an arc set"),
            Invariant::UnknownInput => write!(f, "unknown input {s}"),
            Invariant::UnknownOutput => write!(f, "unknown output {s}"),
            Invariant::EmptyTask => write!(f, "step {s} has an empty task"),
            Invariant::EmptyMarking => write!(f, "empty initial marking"),
            Invariant::UnknownMarkedStep => write!(f, "unknown step {s} in marking"),
            Invariant::RepeatedMarking => write!(f, "step {s} repeated in marking"),
            Invariant::UnknownMacrostep => write!(f, "macrostep {s} is not a declared step"),
            Invariant::MacrostepWithActions => write!(f, "macrostep {s} carries actions"),
        }?;
        if let Some(ctx) = &self.context {
            write!(f, " (in {ctx})")?;
        }
        Ok(())
    }
}

fn duplicates<'a>(
    names: impl IntoIterator<Item = &'a str>,
    kind: Invariant,
    out: &mut Vec<Violation>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !is_identifier(n) {
            out.push(Violation::new(Invariant::BadIdentifier, n));
        }
        if !seen.insert(n) {
            out.push(Violation::new(kind, n));
        }
    }
    seen
}

/// Checks every structural invariant of `net`; an empty result means the net
/// is well formed.
pub fn validate_structure(net: &GrafcetNet) -> Vec<Violation> {
    let mut out = Vec::new();
    if net.steps.is_empty() {
        out.push(Violation::new(Invariant::NoSteps, ""));
    }
    if net.transitions.is_empty() {
        out.push(Violation::new(Invariant::NoTransitions, ""));
    }

    let steps = duplicates(net.steps.iter().map(|s| s.id.as_str()), Invariant::DuplicateStep, &mut out);
    duplicates(net.transitions.iter().map(|t| t.id.as_str()), Invariant::DuplicateTransition, &mut out);
    let inputs = duplicates(net.inputs.iter().map(String::as_str), Invariant::DuplicateInput, &mut out);
    let outputs = duplicates(net.outputs.iter().map(String::as_str), Invariant::DuplicateOutput, &mut out);
    for i in &inputs {
        if steps.contains(i) {
            out.push(Violation::new(Invariant::StepInputClash, i));
        }
    }

    for t in &net.transitions {
        if t.pre.is_empty() {
            out.push(Violation::new(Invariant::EmptyPreSet, &t.id));
        }
        if t.post.is_empty() {
            out.push(Violation::new(Invariant::EmptyPostSet, &t.id));
        }
        for side in [&t.pre, &t.post] {
            let mut seen = BTreeSet::new();
            for s in side {
                if !steps.contains(s.as_str()) {
                    out.push(Violation::within(Invariant::UnknownStep, s, &t.id));
                } else if !seen.insert(s.as_str()) {
                    out.push(Violation::within(Invariant::RepeatedArc, s, &t.id));
                }
            }
        }
        let mut unknown = Vec::new();
        t.receptivity.visit_vars(&mut |v| {
            if !inputs.contains(v) && !unknown.contains(&v) {
                unknown.push(v);
            }
        });
        for v in unknown {
            out.push(Violation::within(Invariant::UnknownInput, v, &t.id));
        }
    }

    for s in &net.steps {
        for task in &s.tasks {
            if task.is_empty() {
                out.push(Violation::new(Invariant::EmptyTask, &s.id));
            }
            for o in task {
                if !outputs.contains(o.as_str()) {
                    out.push(Violation::within(Invariant::UnknownOutput, o, &s.id));
                }
            }
        }
    }

    if net.initial.is_empty() {
        out.push(Violation::new(Invariant::EmptyMarking, ""));
    }
    let mut marked = BTreeSet::new();
    for s in &net.initial {
        if !steps.contains(s.as_str()) {
            out.push(Violation::new(Invariant::UnknownMarkedStep, s));
        } else if !marked.insert(s.as_str()) {
            out.push(Violation::new(Invariant::RepeatedMarking, s));
        }
    }

    for m in net.macrosteps.keys() {
        match net.step(m) {
            None => out.push(Violation::new(Invariant::UnknownMacrostep, m)),
            Some(s) if !s.tasks.is_empty() => out.push(Violation::new(Invariant::MacrostepWithActions, m)),
            Some(_) => {}
        }
    }
    out
}
