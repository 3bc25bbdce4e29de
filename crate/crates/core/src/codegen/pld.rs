use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{GeneratedSource, Target};
use crate::ir::{validate_structure, Expr, GrafcetNet, Operators, Violation};

pub const INIT_SIGNAL: &str = "INIT";

const PALASM: Operators = Operators { and: " * ", or: " + ", not: "/" };

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PldError {
    NotFlat,
    Invalid(Vec<Violation>),
    MissingSignal(String),
}

impl fmt::Display for PldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PldError::NotFlat => write!(f, "net contains macrosteps; flatten it first"),
            PldError::Invalid(v) => {
                write!(f, "invalid net")?;
                for x in v {
                    write!(f, "; {x}")?;
                }
                Ok(())
            }
            PldError::MissingSignal(s) => write!(f, "no value for signal {s}"),
        }
    }
}

impl core::error::Error for PldError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepEquation {
    pub signal: String,
    pub initial: bool,
    pub set: Expr,
    pub reset: Expr,
    pub next: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputEquation {
    pub signal: String,
    pub expr: Expr,
}

/// One-hot equations for a flat net, over sanitized signal names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PldEquationSet {
    pub init: String,
    pub inputs: Vec<String>,
    pub steps: Vec<StepEquation>,
    pub outputs: Vec<OutputEquation>,
    /// Net identifier to signal name.
    pub signals: BTreeMap<String, String>,
}

/// Maps identifiers to signal names: dots become underscores, and clashes
/// (with each other or with INIT) get a numeric suffix.
fn sanitize(names: &[&str]) -> BTreeMap<String, String> {
    let mut taken = BTreeSet::from([String::from(INIT_SIGNAL)]);
    let mut map = BTreeMap::new();
    for &n in names {
        let base = n.replace('.', "_");
        let mut candidate = base.clone();
        let mut k = 2;
        while taken.contains(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        taken.insert(candidate.clone());
        map.insert(n.into(), candidate);
    }
    map
}

/// Product of a transition's pre-step signals and its receptivity.
fn firing_term(pre: &[String], receptivity: &Expr, sig: &BTreeMap<String, String>) -> Expr {
    let mut factors: Vec<Expr> = pre.iter().map(|p| Expr::Var(sig[p].clone())).collect();
    match receptivity.map_vars(&|v| sig[v].clone()) {
        Expr::And(es) => factors.extend(es),
        e => factors.push(e),
    }
    Expr::And(factors)
}

fn sum(terms: Vec<Expr>) -> Expr {
    match terms.len() {
        0 => Expr::Const(false),
        1 => terms.into_iter().next().unwrap(),
        _ => Expr::Or(terms),
    }
}

/// `next(s) = INIT*m0 + /INIT*(set + s*/reset)`, set and reset being the sums
/// of the firing products of the transitions entering and leaving `s`.
pub fn gen_pld_equations(net: &GrafcetNet) -> Result<PldEquationSet, PldError> {
    if !net.is_flat() {
        return Err(PldError::NotFlat);
    }
    let violations = validate_structure(net);
    if !violations.is_empty() {
        return Err(PldError::Invalid(violations));
    }
    let mut all: Vec<&str> = net.inputs.iter().map(String::as_str).collect();
    all.extend(net.steps.iter().map(|s| s.id.as_str()));
    all.extend(net.outputs.iter().map(String::as_str));
    let sig = sanitize(&all);
    let init = Expr::Var(INIT_SIGNAL.into());

    let mut steps = Vec::new();
    for s in &net.steps {
        let signal = sig[&s.id].clone();
        let terms = |side: fn(&crate::ir::Transition) -> &Vec<String>| -> Vec<Expr> {
            net.transitions
                .iter()
                .filter(|t| side(t).contains(&s.id))
                .map(|t| firing_term(&t.pre, &t.receptivity, &sig))
                .collect()
        };
        let set_terms = terms(|t| &t.post);
        let reset = sum(terms(|t| &t.pre));
        let initial = net.initial.contains(&s.id);
        let hold = Expr::And(vec![Expr::Var(signal.clone()), Expr::Not(reset.clone().into())]);
        let mut evolve = set_terms.clone();
        evolve.push(hold);
        let next = Expr::Or(vec![
            Expr::And(vec![init.clone(), Expr::Const(initial)]),
            Expr::And(vec![Expr::Not(init.clone().into()), sum(evolve)]),
        ]);
        steps.push(StepEquation { signal, initial, set: sum(set_terms), reset, next });
    }
    let outputs = net
        .outputs
        .iter()
        .map(|o| {
            let drivers = net
                .steps
                .iter()
                .filter(|s| s.actions().any(|a| a == o))
                .map(|s| Expr::Var(sig[&s.id].clone()))
                .collect();
            OutputEquation { signal: sig[o].clone(), expr: sum(drivers) }
        })
        .collect();
    Ok(PldEquationSet {
        init: INIT_SIGNAL.into(),
        inputs: net.inputs.iter().map(|i| sig[i].clone()).collect(),
        steps,
        outputs,
        signals: sig,
    })
}

/// Palasm-style text: a header declaring the signals, then one equation per
/// line, registered steps first.
pub fn render_palasm(eqs: &PldEquationSet, chip: &str) -> GeneratedSource {
    let mut out = String::new();
    let _ = writeln!(out, "CHIP {chip}");
    let _ = writeln!(out);
    let decl = |out: &mut String, kind: &str, names: &mut dyn Iterator<Item = &str>| {
        let names: Vec<&str> = names.collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{kind} {}", names.join(" "));
        }
    };
    let mut inputs = core::iter::once(eqs.init.as_str()).chain(eqs.inputs.iter().map(String::as_str));
    decl(&mut out, "INPUTS", &mut inputs);
    decl(&mut out, "REGISTERED", &mut eqs.steps.iter().map(|s| s.signal.as_str()));
    decl(&mut out, "COMBINATORIAL", &mut eqs.outputs.iter().map(|o| o.signal.as_str()));
    let _ = writeln!(out);
    let _ = writeln!(out, "EQUATIONS");
    let _ = writeln!(out);
    let mut symbols = Vec::new();
    for s in &eqs.steps {
        let _ = writeln!(out, "{} := {}", s.signal, s.next.render(&PALASM));
        symbols.push(s.signal.clone());
    }
    for o in &eqs.outputs {
        let _ = writeln!(out, "{} = {}", o.signal, o.expr.render(&PALASM));
        symbols.push(o.signal.clone());
    }
    GeneratedSource { target: Target::Pld, text: out, symbols }
}

/// Signal name to level.
pub type Signals = BTreeMap<String, bool>;

/// One synchronous clock: next step signals from `state` and `inputs`
/// (which must include INIT), and the outputs of the next state.
pub fn simulate_equations(
    eqs: &PldEquationSet,
    state: &BTreeMap<String, bool>,
    inputs: &BTreeMap<String, bool>,
) -> Result<(Signals, Signals), PldError> {
    let lookup = |v: &str| state.get(v).or_else(|| inputs.get(v)).copied();
    let missing =
        |e: &Expr| e.variables().into_iter().find(|v| lookup(v).is_none()).map(|v| PldError::MissingSignal(v.into()));
    let mut next = BTreeMap::new();
    for s in &eqs.steps {
        if let Some(e) = missing(&s.next) {
            return Err(e);
        }
        next.insert(s.signal.clone(), s.next.eval_with(&lookup).unwrap());
    }
    let mut outputs = BTreeMap::new();
    for o in &eqs.outputs {
        let value = o.expr.eval_with(&|v| next.get(v).copied()).map_err(|_| {
            PldError::MissingSignal(
                o.expr.variables().into_iter().find(|v| !next.contains_key(*v)).unwrap_or("?").into(),
            )
        })?;
        outputs.insert(o.signal.clone(), value);
    }
    Ok((next, outputs))
}
