use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ir::{validate_structure, GrafcetNet, Hierarchy, HierarchyError, Invariant, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlattenError {
    Hierarchy(HierarchyError),
    /// A prefixed name clashes with an existing identifier.
    NameCollision(String),
    Invalid(Vec<Violation>),
}

impl fmt::Display for FlattenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlattenError::Hierarchy(e) => e.fmt(f),
            FlattenError::NameCollision(n) => write!(f, "flattened name {n} collides with an existing identifier"),
            FlattenError::Invalid(v) => {
                write!(f, "flattened net is malformed")?;
                for x in v {
                    write!(f, "; {x}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for FlattenError {}

impl From<HierarchyError> for FlattenError {
    fn from(e: HierarchyError) -> Self {
        FlattenError::Hierarchy(e)
    }
}

struct Expanded {
    net: GrafcetNet,
    entry: Option<String>,
    exit: Option<String>,
}

fn prefixed(prefix: &str, name: &str) -> String {
    format!("{prefix}.{name}")
}

fn push_unique(into: &mut Vec<String>, from: &[String]) {
    for x in from {
        if !into.contains(x) {
            into.push(x.clone());
        }
    }
}

fn expand(h: &Hierarchy, net: &GrafcetNet) -> Result<Expanded, FlattenError> {
    let mut out = GrafcetNet::new(net.name.clone());
    out.inputs = net.inputs.clone();
    out.outputs = net.outputs.clone();
    // Macrostep -> (flat entry step, flat exit step).
    let mut ports: BTreeMap<&str, (String, String)> = BTreeMap::new();
    let mut subs: Vec<(&str, Expanded)> = Vec::new();

    for step in &net.steps {
        let Some(link) = net.macrosteps.get(&step.id) else {
            out.steps.push(step.clone());
            continue;
        };
        let sub = expand(h, &h.nets[link])?;
        let (Some(entry), Some(exit)) = (&sub.entry, &sub.exit) else {
            // validate() guarantees both exist.
            return Err(HierarchyError::Entry { net: link.clone(), count: 0 }.into());
        };
        ports.insert(&step.id, (prefixed(&step.id, entry), prefixed(&step.id, exit)));
        for s in &sub.net.steps {
            let mut s = s.clone();
            s.id = prefixed(&step.id, &s.id);
            s.entry = false;
            s.exit = false;
            out.steps.push(s);
        }
        push_unique(&mut out.inputs, &sub.net.inputs);
        push_unique(&mut out.outputs, &sub.net.outputs);
        subs.push((&step.id, sub));
    }

    let into = |s: &String| ports.get(s.as_str()).map_or_else(|| s.clone(), |p| p.0.clone());
    let out_of = |s: &String| ports.get(s.as_str()).map_or_else(|| s.clone(), |p| p.1.clone());
    for t in &net.transitions {
        let mut t = t.clone();
        t.pre = t.pre.iter().map(out_of).collect();
        t.post = t.post.iter().map(into).collect();
        out.transitions.push(t);
    }
    for (m, sub) in &subs {
        for t in &sub.net.transitions {
            let mut t = t.clone();
            t.id = prefixed(m, &t.id);
            t.pre = t.pre.iter().map(|s| prefixed(m, s)).collect();
            t.post = t.post.iter().map(|s| prefixed(m, s)).collect();
            out.transitions.push(t);
        }
    }
    out.initial = net.initial.iter().map(into).collect();

    let single = |v: Vec<&str>| if v.len() == 1 { Some(String::from(v[0])) } else { None };
    let entry = single(net.entry_steps()).map(|s| into(&s));
    let exit = single(net.exit_steps()).map(|s| out_of(&s));
    Ok(Expanded { net: out, entry, exit })
}

/// Substitutes every macrostep by a copy of its sub-net with identifiers
/// prefixed `<macrostep>.`. Arcs into a macrostep go to its input step, arcs
/// out of it leave from its output step, and an initially active macrostep
/// is replaced by its input step. Inputs and outputs are shared signals and
/// keep their names.
pub fn flatten(h: &Hierarchy) -> Result<GrafcetNet, FlattenError> {
    h.validate()?;
    let flat = expand(h, h.root_net())?.net;
    let violations = validate_structure(&flat);
    if let Some(v) =
        violations.iter().find(|v| matches!(v.invariant, Invariant::DuplicateStep | Invariant::DuplicateTransition))
    {
        return Err(FlattenError::NameCollision(v.subject.clone()));
    }
    if !violations.is_empty() {
        return Err(FlattenError::Invalid(violations));
    }
    Ok(flat)
}
