use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::expr::Expr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub id: String,
    /// Output names asserted by the step, grouped into indivisible tasks.
    pub tasks: Vec<Vec<String>>,
    /// Scheduling weight `P`.
    pub priority: u32,
    /// Marked as the designated input step when used as a sub-net.
    pub entry: bool,
    /// Marked as the designated output step when used as a sub-net.
    pub exit: bool,
}

impl Step {
    pub fn new(id: impl Into<String>) -> Step {
        Step { id: id.into(), tasks: Vec::new(), priority: 0, entry: false, exit: false }
    }

    pub fn with_tasks(mut self, tasks: Vec<Vec<String>>) -> Step {
        self.tasks = tasks;
        self
    }

    pub fn with_priority(mut self, p: u32) -> Step {
        self.priority = p;
        self
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.tasks.iter().flatten().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub pre: Vec<String>,
    pub post: Vec<String>,
    pub receptivity: Expr,
}

impl Transition {
    pub fn new(id: impl Into<String>, pre: &[&str], receptivity: Expr, post: &[&str]) -> Transition {
        Transition {
            id: id.into(),
            pre: pre.iter().map(|s| String::from(*s)).collect(),
            post: post.iter().map(|s| String::from(*s)).collect(),
            receptivity,
        }
    }
}

/// One grafcet: steps, transitions, its signature and initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrafcetNet {
    pub name: String,
    pub steps: Vec<Step>,
    pub transitions: Vec<Transition>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub initial: Vec<String>,
    /// Macrostep id to the name of the sub-net it stands for.
    pub macrosteps: BTreeMap<String, String>,
}

impl GrafcetNet {
    pub fn new(name: impl Into<String>) -> GrafcetNet {
        GrafcetNet {
            name: name.into(),
            steps: Vec::new(),
            transitions: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: Vec::new(),
            macrosteps: BTreeMap::new(),
        }
    }

    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn step_index(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.id == id)
    }

    pub fn is_macrostep(&self, id: &str) -> bool {
        self.macrosteps.contains_key(id)
    }

    pub fn is_flat(&self) -> bool {
        self.macrosteps.is_empty()
    }

    pub fn initial_marking(&self) -> Marking {
        self.marking_of(self.initial.iter().map(String::as_str))
    }

    /// Builds a marking from step names; unknown names are ignored.
    pub fn marking_of<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Marking {
        Marking(names.into_iter().filter_map(|n| self.step_index(n)).collect())
    }

    /// Designated input step for use as a sub-net: the steps marked `in`, or
    /// the initial marking when nothing is marked.
    pub fn entry_steps(&self) -> Vec<&str> {
        let marked: Vec<&str> = self.steps.iter().filter(|s| s.entry).map(|s| s.id.as_str()).collect();
        if marked.is_empty() {
            self.initial.iter().map(String::as_str).collect()
        } else {
            marked
        }
    }

    pub fn exit_steps(&self) -> Vec<&str> {
        self.steps.iter().filter(|s| s.exit).map(|s| s.id.as_str()).collect()
    }
}

/// The set of active steps, as indices into the owning net's step list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub BTreeSet<usize>);

impl Marking {
    pub fn contains(&self, step: usize) -> bool {
        self.0.contains(&step)
    }

    pub fn contains_all(&self, steps: &[usize]) -> bool {
        steps.iter().all(|s| self.0.contains(s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Step names in declaration order.
    pub fn names<'a>(&self, net: &'a GrafcetNet) -> Vec<&'a str> {
        self.0.iter().map(|&i| net.steps[i].id.as_str()).collect()
    }

    pub fn display<'a>(&'a self, net: &'a GrafcetNet) -> MarkingDisplay<'a> {
        MarkingDisplay { marking: self, net }
    }
}

pub struct MarkingDisplay<'a> {
    marking: &'a Marking,
    net: &'a GrafcetNet,
}

impl fmt::Display for MarkingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, n) in self.marking.names(self.net).iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(n)?;
        }
        f.write_str("}")
    }
}

/// Identifier grammar: letters, digits, `_` and `.`; not starting with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '.' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '.')
}
