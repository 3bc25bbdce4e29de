use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use super::model::Model;
use super::source::EventSource;
use super::trace::{EventKind, MacroStatus, TraceEvent};

/// How F picks among the active grafcets before applying the step-level
/// order inside each one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulingPolicy {
    #[default]
    DeclarationOrder,
    LowestLevel,
    Priority,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub policy: SchedulingPolicy,
    /// Tasks per step per slice; `None` runs every pending task at once.
    pub budget: Option<usize>,
    /// F iterations allowed between two W calls.
    pub divergence_cap: usize,
}

pub const DEFAULT_DIVERGENCE_CAP: usize = 10_000;

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            policy: SchedulingPolicy::DeclarationOrder,
            budget: None,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    UnknownInput { tick: u64, name: String },
    Divergence { marking: String, firings: usize },
    Source(String),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::UnknownInput { tick, name } => write!(f, "tick {tick}: unknown input {name}"),
            EngineError::Divergence { marking, firings } => {
                write!(
                    f,
                    "no stable state after {firings} firing rounds without input; marking {marking} keeps repeating"
                )
            }
            EngineError::Source(e) => write!(f, "event source: {e}"),
        }
    }
}

impl core::error::Error for EngineError {}

/// Runtime state of one model: per-step A, T and task cursor, the tick
/// counter and the signal values.
#[derive(Debug, Clone)]
pub struct Engine {
    model: Model,
    config: EngineConfig,
    active: Vec<bool>,
    elapsed: Vec<u64>,
    cursor: Vec<usize>,
    inputs: Vec<bool>,
    outputs: Vec<bool>,
    status: Vec<MacroStatus>,
    tick: u64,
    warned: BTreeSet<usize>,
    started: bool,
    pending: Vec<TraceEvent>,
}

impl Engine {
    pub fn new(model: Model, config: EngineConfig) -> Engine {
        let (n, i, o) = (model.steps.len(), model.inputs.len(), model.outputs.len());
        Engine {
            model,
            config,
            active: vec![false; n],
            elapsed: vec![0; n],
            cursor: vec![0; n],
            inputs: vec![false; i],
            outputs: vec![false; o],
            status: vec![MacroStatus::Inactive; n],
            tick: 0,
            warned: BTreeSet::new(),
            started: false,
            pending: Vec::new(),
        }
    }

    /// An engine placed directly at `marking` with the given input values,
    /// without running I. Tasks of the marked steps count as executed.
    pub fn at_marking(model: Model, config: EngineConfig, marking: &[usize], inputs: &[bool]) -> Engine {
        let mut e = Engine::new(model, config);
        for &s in marking {
            e.active[s] = true;
            e.cursor[s] = e.model.steps[s].tasks.len();
        }
        e.inputs.copy_from_slice(inputs);
        e.outputs = e.compute_outputs().0;
        e.status = (0..e.active.len()).map(|s| e.macro_status(s)).collect();
        e.started = true;
        e
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Active steps, macrosteps included, in model order.
    pub fn marking(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&s| self.active[s]).collect()
    }

    pub fn marking_text(&self) -> String {
        let names: Vec<&str> = self.marking().into_iter().map(|s| self.model.steps[s].name.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn elapsed(&self, step: usize) -> u64 {
        self.elapsed[step]
    }

    pub fn status(&self, step: usize) -> MacroStatus {
        self.status[step]
    }

    /// Events produced since the last call.
    pub fn take_events(&mut self) -> Vec<TraceEvent> {
        core::mem::take(&mut self.pending)
    }

    fn emit(&mut self, kind: EventKind) {
        self.pending.push(TraceEvent { tick: self.tick, kind });
    }

    fn exit_of(&self, m: usize) -> usize {
        let g = self.model.steps[m].sub.expect("macrostep");
        self.model.grafcets[g].exit.expect("sub-net output step")
    }

    fn entry_of(&self, m: usize) -> usize {
        let g = self.model.steps[m].sub.expect("macrostep");
        self.model.grafcets[g].entry.expect("sub-net input step")
    }

    /// Counts as marked for enabling: active, and complete if a macrostep.
    fn satisfied(&self, s: usize) -> bool {
        self.active[s] && (!self.model.is_macrostep(s) || self.satisfied(self.exit_of(s)))
    }

    fn macro_status(&self, s: usize) -> MacroStatus {
        if !self.model.is_macrostep(s) || !self.active[s] {
            MacroStatus::Inactive
        } else if self.satisfied(s) {
            MacroStatus::Complete
        } else {
            MacroStatus::Active
        }
    }

    fn effective_priority(&self, s: usize) -> u32 {
        if self.model.is_macrostep(s) {
            self.effective_priority(self.entry_of(s))
        } else {
            self.model.steps[s].priority
        }
    }

    fn effective_elapsed(&self, s: usize) -> u64 {
        if self.model.is_macrostep(s) {
            self.effective_elapsed(self.exit_of(s))
        } else {
            self.elapsed[s]
        }
    }

    fn receptive(&self, t: usize) -> bool {
        let inputs = &self.inputs;
        let model = &self.model;
        model.transitions[t]
            .receptivity
            .eval_with(&|v| model.input_index(v).map(|i| inputs[i]))
            .expect("receptivity over declared inputs")
    }

    pub fn is_fireable(&self, t: usize) -> bool {
        self.model.transitions[t].pre.iter().all(|&s| self.satisfied(s)) && self.receptive(t)
    }

    fn group_key(&self, g: usize) -> (u64, usize) {
        let gr = &self.model.grafcets[g];
        match self.config.policy {
            SchedulingPolicy::DeclarationOrder => (0, g),
            SchedulingPolicy::LowestLevel => (gr.level as u64, g),
            SchedulingPolicy::Priority => (u64::from(u32::MAX - gr.priority), g),
        }
    }

    /// D: the fireable set in firing order.
    pub fn determine_fireable(&self) -> Vec<usize> {
        let mut x: Vec<usize> = (0..self.model.transitions.len()).filter(|&t| self.is_fireable(t)).collect();
        x.sort_by_key(|&t| {
            let tr = &self.model.transitions[t];
            let p = tr.post.iter().map(|&s| self.effective_priority(s)).max().unwrap_or(0);
            let age = tr.pre.iter().map(|&s| self.effective_elapsed(s)).max().unwrap_or(0);
            (self.group_key(tr.grafcet), Reverse(p), Reverse(age), t)
        });
        x
    }

    /// Whether `step` lies inside the sub-net tree of macrostep `m`.
    fn within(&self, step: usize, m: usize) -> bool {
        let mut g = self.model.steps[step].grafcet;
        while let Some(owner) = self.model.grafcets[g].owner {
            if owner == m {
                return true;
            }
            g = self.model.steps[owner].grafcet;
        }
        false
    }

    fn activation_closure(&self, s: usize, out: &mut BTreeSet<usize>) {
        out.insert(s);
        if self.model.is_macrostep(s) {
            self.activation_closure(self.entry_of(s), out);
        }
    }

    fn deactivation_closure(&self, s: usize, out: &mut BTreeSet<usize>) {
        out.insert(s);
        if self.model.is_macrostep(s) {
            out.extend((0..self.active.len()).filter(|&k| self.active[k] && self.within(k, s)));
        }
    }

    fn activate(&mut self, targets: BTreeSet<usize>) {
        for s in targets {
            let plain = !self.model.is_macrostep(s);
            if self.active[s] {
                if plain {
                    let text = format!("{} already active", self.model.steps[s].name);
                    self.emit(EventKind::Warn(text));
                }
                continue;
            }
            self.active[s] = true;
            self.elapsed[s] = 0;
            self.cursor[s] = 0;
            if plain {
                self.emit(EventKind::Act(self.model.steps[s].name.clone()));
            }
        }
    }

    fn fire(&mut self, t: usize) {
        let tr = &self.model.transitions[t];
        let (name, pre, post) = (tr.name.clone(), tr.pre.clone(), tr.post.clone());
        self.emit(EventKind::Fire(name));
        let mut off = BTreeSet::new();
        for s in pre {
            self.deactivation_closure(s, &mut off);
        }
        for s in off {
            if !self.active[s] {
                continue;
            }
            self.active[s] = false;
            self.cursor[s] = 0;
            if !self.model.is_macrostep(s) {
                self.emit(EventKind::Deact(self.model.steps[s].name.clone()));
            }
        }
        let mut on = BTreeSet::new();
        for s in post {
            self.activation_closure(s, &mut on);
        }
        self.activate(on);
        self.settle();
    }

    fn tasks_pending(&self) -> bool {
        (0..self.active.len()).any(|s| self.active[s] && self.cursor[s] < self.model.steps[s].tasks.len())
    }

    /// Runs one task slice, then publishes output and macrostep changes.
    fn settle(&mut self) {
        for s in 0..self.active.len() {
            let len = self.model.steps[s].tasks.len();
            if !self.active[s] || self.cursor[s] >= len {
                continue;
            }
            let end = self.config.budget.map_or(len, |b| len.min(self.cursor[s] + b));
            for k in self.cursor[s]..end {
                self.emit(EventKind::Task { step: self.model.steps[s].name.clone(), index: k });
            }
            self.cursor[s] = end;
        }
        let (outputs, sources) = self.compute_outputs();
        for (o, &value) in outputs.iter().enumerate() {
            if value != self.outputs[o] {
                self.outputs[o] = value;
                self.emit(EventKind::Out { name: self.model.outputs[o].clone(), value });
            }
        }
        for (o, steps) in sources.iter().enumerate() {
            if steps.len() > 1 && self.warned.insert(o) {
                let names: Vec<&str> = steps.iter().map(|&s| self.model.steps[s].name.as_str()).collect();
                let text = format!("output {} asserted by {}", self.model.outputs[o], names.join(", "));
                self.emit(EventKind::Warn(text));
            }
        }
        for s in 0..self.active.len() {
            let now = self.macro_status(s);
            if now != self.status[s] {
                self.status[s] = now;
                self.emit(EventKind::Macro { step: self.model.steps[s].name.clone(), status: now });
            }
        }
    }

    /// Output values and, per output, the active steps asserting it.
    fn compute_outputs(&self) -> (Vec<bool>, Vec<Vec<usize>>) {
        let mut sources: Vec<Vec<usize>> = vec![Vec::new(); self.outputs.len()];
        for s in 0..self.active.len() {
            if !self.active[s] {
                continue;
            }
            for task in &self.model.steps[s].tasks[..self.cursor[s]] {
                for &o in task {
                    if !sources[o].contains(&s) {
                        sources[o].push(s);
                    }
                }
            }
        }
        (sources.iter().map(|v| !v.is_empty()).collect(), sources)
    }

    /// I: activates the root's initial steps.
    pub fn init(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        self.emit(EventKind::Init);
        let mut on = BTreeSet::new();
        for s in self.model.initial.clone() {
            self.activation_closure(s, &mut on);
        }
        self.activate(on);
        self.settle();
    }

    /// F: fires `x` in order, skipping entries no longer fireable.
    pub fn fire_all(&mut self, x: &[usize]) {
        for &t in x {
            if self.is_fireable(t) {
                self.fire(t);
            }
        }
    }

    /// One D+F pass; false when nothing was fireable.
    pub fn step(&mut self) -> bool {
        let x = self.determine_fireable();
        self.fire_all(&x);
        !x.is_empty()
    }

    /// W: applies the next batch. False when the source is exhausted.
    pub fn await_event(&mut self, source: &mut dyn EventSource) -> Result<bool, EngineError> {
        let Some(batch) = source.next_batch(self.tick).map_err(EngineError::Source)? else {
            return Ok(false);
        };
        let mut indices = Vec::new();
        for (name, value) in &batch.changes {
            let i = self
                .model
                .input_index(name)
                .ok_or_else(|| EngineError::UnknownInput { tick: batch.tick, name: name.clone() })?;
            indices.push((i, *value));
        }
        let delta = batch.tick.saturating_sub(self.tick);
        for s in 0..self.active.len() {
            if self.active[s] {
                self.elapsed[s] += delta;
            }
        }
        if batch.tick != self.tick {
            self.warned.clear();
        }
        self.tick = batch.tick;
        for (i, value) in indices {
            self.inputs[i] = value;
            self.emit(EventKind::In { name: self.model.inputs[i].clone(), value });
        }
        Ok(true)
    }

    /// The full loop: I, then D followed by F, a task slice, or W, until the
    /// source runs dry. Events are handed to `sink` before every wait.
    pub fn run(&mut self, source: &mut dyn EventSource, sink: &mut dyn FnMut(&TraceEvent)) -> Result<(), EngineError> {
        self.init();
        let mut rounds = 0;
        let result = loop {
            let x = self.determine_fireable();
            if !x.is_empty() {
                if rounds == self.config.divergence_cap {
                    break Err(EngineError::Divergence { marking: self.marking_text(), firings: rounds });
                }
                rounds += 1;
                self.fire_all(&x);
            } else if self.tasks_pending() {
                self.settle();
            } else {
                for e in self.take_events() {
                    sink(&e);
                }
                match self.await_event(source) {
                    Ok(true) => rounds = 0,
                    Ok(false) => break Ok(()),
                    Err(e) => break Err(e),
                }
            }
        };
        for e in self.take_events() {
            sink(&e);
        }
        result
    }
}

/// Runs `model` against `source` and collects the trace, which is returned
/// even when the run stops on an error.
pub fn run(
    model: &Model,
    config: &EngineConfig,
    mut source: impl EventSource,
) -> (Vec<TraceEvent>, Result<(), EngineError>) {
    let mut engine = Engine::new(model.clone(), config.clone());
    let mut trace = Vec::new();
    let result = engine.run(&mut source, &mut |e| trace.push(e.clone()));
    (trace, result)
}
