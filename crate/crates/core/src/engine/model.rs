use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ir::{validate_structure, Expr, GrafcetNet, Hierarchy, HierarchyError, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    NotFlat,
    Hierarchy(HierarchyError),
    Invalid(Vec<Violation>),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NotFlat => write!(f, "net contains macrosteps; load it as a hierarchy"),
            ModelError::Hierarchy(e) => e.fmt(f),
            ModelError::Invalid(v) => {
                write!(f, "invalid net")?;
                for x in v {
                    write!(f, "; {x}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl From<HierarchyError> for ModelError {
    fn from(e: HierarchyError) -> Self {
        ModelError::Hierarchy(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelStep {
    /// Fully qualified, e.g. `M.p1` inside macrostep `M`.
    pub name: String,
    pub priority: u32,
    /// Output indices per task.
    pub tasks: Vec<Vec<usize>>,
    pub grafcet: usize,
    /// The grafcet this macrostep owns.
    pub sub: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelTransition {
    pub name: String,
    pub pre: Vec<usize>,
    pub post: Vec<usize>,
    pub receptivity: Expr,
    pub grafcet: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grafcet {
    /// Empty for the root.
    pub prefix: String,
    pub level: usize,
    /// Highest P among the grafcet's own ordinary steps.
    pub priority: u32,
    pub owner: Option<usize>,
    pub entry: Option<usize>,
    pub exit: Option<usize>,
}

/// A net or hierarchy compiled to index tables. Steps are numbered in
/// depth-first order with every macrostep followed by its sub-net's steps;
/// transitions and grafcets follow the same preorder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub steps: Vec<ModelStep>,
    pub transitions: Vec<ModelTransition>,
    pub grafcets: Vec<Grafcet>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub initial: Vec<usize>,
}

fn qualify(prefix: &str, id: &str) -> String {
    if prefix.is_empty() {
        id.into()
    } else {
        format!("{prefix}.{id}")
    }
}

fn push_unique(into: &mut Vec<String>, from: &[String]) {
    for x in from {
        if !into.contains(x) {
            into.push(x.clone());
        }
    }
}

impl Model {
    /// Compiles a flat net. Grafcet membership is recovered from dotted
    /// names, so a flattened hierarchy keeps its two scheduling levels.
    pub fn flat(net: &GrafcetNet) -> Result<Model, ModelError> {
        if !net.is_flat() {
            return Err(ModelError::NotFlat);
        }
        let violations = validate_structure(net);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        let mut grafcets =
            vec![Grafcet { prefix: String::new(), level: 0, priority: 0, owner: None, entry: None, exit: None }];
        let mut by_prefix: BTreeMap<String, usize> = BTreeMap::from([(String::new(), 0)]);
        let mut group = |name: &str, grafcets: &mut Vec<Grafcet>| -> usize {
            let Some((prefix, _)) = name.rsplit_once('.') else { return 0 };
            let mut at = 0;
            for (k, _) in prefix.match_indices('.').chain([(prefix.len(), "")]) {
                let p = &prefix[..k];
                at = *by_prefix.entry(p.into()).or_insert_with(|| {
                    grafcets.push(Grafcet {
                        prefix: p.into(),
                        level: p.split('.').count(),
                        priority: 0,
                        owner: None,
                        entry: None,
                        exit: None,
                    });
                    grafcets.len() - 1
                });
            }
            at
        };
        let outputs = net.outputs.clone();
        let out_index = |o: &String| outputs.iter().position(|x| x == o).unwrap();
        let mut steps = Vec::new();
        for s in &net.steps {
            let g = group(&s.id, &mut grafcets);
            grafcets[g].priority = grafcets[g].priority.max(s.priority);
            steps.push(ModelStep {
                name: s.id.clone(),
                priority: s.priority,
                tasks: s.tasks.iter().map(|t| t.iter().map(out_index).collect()).collect(),
                grafcet: g,
                sub: None,
            });
        }
        let idx = |n: &String| net.step_index(n).unwrap();
        let mut transitions = Vec::new();
        for t in &net.transitions {
            transitions.push(ModelTransition {
                name: t.id.clone(),
                pre: t.pre.iter().map(idx).collect(),
                post: t.post.iter().map(idx).collect(),
                receptivity: t.receptivity.clone(),
                grafcet: group(&t.id, &mut grafcets),
            });
        }
        Ok(Model {
            steps,
            transitions,
            grafcets,
            inputs: net.inputs.clone(),
            outputs: net.outputs.clone(),
            initial: net.initial.iter().map(idx).collect(),
        })
    }

    /// Compiles a hierarchy with macrosteps kept as three-state steps.
    pub fn hierarchical(h: &Hierarchy) -> Result<Model, ModelError> {
        h.validate()?;
        let mut model = Model {
            steps: Vec::new(),
            transitions: Vec::new(),
            grafcets: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: Vec::new(),
        };
        // Signals first, root first, so output indices are final.
        let mut order = Vec::new();
        collect_nets(h, h.root_net(), &mut order);
        for net in &order {
            push_unique(&mut model.inputs, &net.inputs);
            push_unique(&mut model.outputs, &net.outputs);
        }
        let mut nets = Vec::new();
        model.add_steps(h, h.root_net(), String::new(), 0, None, &mut nets);
        for (g, net) in nets.iter().enumerate() {
            let prefix = model.grafcets[g].prefix.clone();
            for t in &net.transitions {
                let idx = |n: &String| model.step_index(&qualify(&prefix, n)).unwrap();
                let tr = ModelTransition {
                    name: qualify(&prefix, &t.id),
                    pre: t.pre.iter().map(idx).collect(),
                    post: t.post.iter().map(idx).collect(),
                    receptivity: t.receptivity.clone(),
                    grafcet: g,
                };
                model.transitions.push(tr);
            }
        }
        model.initial = h.root_net().initial.iter().map(|n| model.step_index(n).unwrap()).collect();
        Ok(model)
    }

    fn add_steps<'h>(
        &mut self,
        h: &'h Hierarchy,
        net: &'h GrafcetNet,
        prefix: String,
        level: usize,
        owner: Option<usize>,
        nets: &mut Vec<&'h GrafcetNet>,
    ) {
        let g = self.grafcets.len();
        self.grafcets.push(Grafcet { prefix: prefix.clone(), level, priority: 0, owner, entry: None, exit: None });
        nets.push(net);
        for s in &net.steps {
            let at = self.steps.len();
            let name = qualify(&prefix, &s.id);
            let outputs = &self.outputs;
            let tasks = s
                .tasks
                .iter()
                .map(|t| t.iter().map(|o| outputs.iter().position(|x| x == o).unwrap()).collect())
                .collect();
            self.steps.push(ModelStep { name: name.clone(), priority: s.priority, tasks, grafcet: g, sub: None });
            match net.macrosteps.get(&s.id) {
                Some(link) => {
                    let sub = &h.nets[link];
                    self.steps[at].sub = Some(self.grafcets.len());
                    self.add_steps(h, sub, name, level + 1, Some(at), nets);
                }
                None => self.grafcets[g].priority = self.grafcets[g].priority.max(s.priority),
            }
        }
        if owner.is_some() {
            let (entry, exit) = Hierarchy::io_steps(net).expect("validated hierarchy");
            self.grafcets[g].entry = self.step_index(&qualify(&prefix, entry));
            self.grafcets[g].exit = self.step_index(&qualify(&prefix, exit));
        }
    }

    pub fn step_index(&self, name: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.name == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|i| i == name)
    }

    pub fn is_macrostep(&self, step: usize) -> bool {
        self.steps[step].sub.is_some()
    }
}

fn collect_nets<'h>(h: &'h Hierarchy, net: &'h GrafcetNet, out: &mut Vec<&'h GrafcetNet>) {
    out.push(net);
    for s in &net.steps {
        if let Some(link) = net.macrosteps.get(&s.id) {
            collect_nets(h, &h.nets[link], out);
        }
    }
}
