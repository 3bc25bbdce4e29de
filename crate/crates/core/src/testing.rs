//! Corpus access for unit tests.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use proptest::prelude::*;

use crate::frontend::parse_rules;
use crate::frontend::ScriptEvent;
use crate::ir::{Expr, GrafcetNet, Hierarchy, Step, Transition};

pub const TRUCK: &str = include_str!("../../../corpus/truck.gcf");
pub const TRUCK_CYCLE: &str = include_str!("../../../corpus/truck_cycle.gcf");
pub const CYCLE_SCRIPT: &str = include_str!("../../../corpus/cycle.evt");
pub const FIG5: &str = include_str!("../../../corpus/fig5.gcf");
pub const FIG5_SAME: &str = include_str!("../../../corpus/fig5_same.gcf");
pub const FIG6: &str = include_str!("../../../corpus/fig6.gcf");
pub const FIG7: &str = include_str!("../../../corpus/fig7.gcf");
pub const PLANT: &str = include_str!("../../../corpus/plant.gcf");
pub const MIXER: &str = include_str!("../../../corpus/mixer.gcf");

pub fn net(name: &str, text: &str) -> GrafcetNet {
    match parse_rules(name, text) {
        Ok(n) => n,
        Err(d) => panic!("{name}: {d:?}"),
    }
}

pub fn truck() -> GrafcetNet {
    net("truck", TRUCK)
}

pub fn plant() -> Hierarchy {
    let mut nets = BTreeMap::new();
    nets.insert("plant".to_string(), net("plant", PLANT));
    nets.insert("truck_cycle.gcf".to_string(), net("truck_cycle.gcf", TRUCK_CYCLE));
    Hierarchy { root: "plant".into(), nets }
}

/// `levels` nets chained through one macrostep each; the innermost is plain.
pub fn nested(levels: usize) -> Hierarchy {
    let mut nets = BTreeMap::new();
    for k in 0..levels {
        let name = if k == 0 { "root".to_string() } else { format!("l{k}") };
        let text = if k + 1 < levels {
            format!(
                "Step p1 (in), M{}, p3 (out)\nMacrostep M{} -> \"l{}\"\nTransition ta, tb, tc\nInput x{k}\n\
                 Marking p1\nTransitions:\nta: p1 * x{k} |- @M{}\ntb: M{} |- @p3\ntc: p3 * !x{k} |- @p1\n",
                k + 1,
                k + 1,
                k + 1,
                k + 1,
                k + 1
            )
        } else {
            format!(
                "Step p1 (in), p2 (out)\nTransition ta, tb\nInput x{k}\nMarking p1\nTransitions:\n\
                 ta: p1 * x{k} |- @p2\ntb: p2 * !x{k} |- @p1\n"
            )
        };
        nets.insert(name.clone(), net(&name, &text));
    }
    Hierarchy { root: "root".into(), nets }
}

pub const TRUCK_TRACE: &str = include_str!("../../../corpus/truck.trace");
pub const MIXER_SCRIPT: &str = include_str!("../../../corpus/mixer.evt");

/// Random flat nets (up to 8 steps, 4 inputs) with a matching random script.
pub fn arb_net() -> impl Strategy<Value = (GrafcetNet, Vec<ScriptEvent>)> {
    (2usize..=8, 1usize..=4).prop_flat_map(|(steps, inputs)| {
        let subset = proptest::collection::btree_set(0..steps, 1..=2);
        let literal = (0..inputs, any::<bool>());
        let guard = proptest::collection::vec(literal, 0..=2);
        let transition = (subset.clone(), subset, guard);
        let script = proptest::collection::vec((0u64..3, 0..inputs, any::<bool>()), 0..25);
        let task = proptest::collection::btree_set(0usize..3, 1..=2);
        let actions = proptest::collection::vec((0u32..4, proptest::collection::vec(task, 0..=2)), steps);
        (
            proptest::collection::vec(transition, 1..=6),
            proptest::collection::btree_set(0..steps, 1..=2),
            script,
            actions,
        )
            .prop_map(move |(ts, initial, script, actions)| {
                let mut net = GrafcetNet::new("random");
                net.steps = actions
                    .into_iter()
                    .enumerate()
                    .map(|(k, (p, tasks))| {
                        let tasks =
                            tasks.into_iter().map(|t| t.into_iter().map(|o| format!("O{o}")).collect()).collect();
                        Step::new(format!("s{k}")).with_priority(p).with_tasks(tasks)
                    })
                    .collect();
                net.outputs = (0..3).map(|k| format!("O{k}")).collect();
                net.inputs = (0..inputs).map(|k| format!("i{k}")).collect();
                net.initial = initial.iter().map(|k| format!("s{k}")).collect();
                for (n, (pre, post, guard)) in ts.into_iter().enumerate() {
                    let lits = guard
                        .into_iter()
                        .map(|(v, pos)| {
                            let e = Expr::var(format!("i{v}"));
                            if pos {
                                e
                            } else {
                                Expr::not(e)
                            }
                        })
                        .collect();
                    let names = |s: BTreeSet<usize>| s.into_iter().map(|k| format!("s{k}")).collect::<Vec<_>>();
                    let (pre, post) = (names(pre), names(post));
                    let pre: Vec<&str> = pre.iter().map(String::as_str).collect();
                    let post: Vec<&str> = post.iter().map(String::as_str).collect();
                    net.transitions.push(Transition::new(format!("t{n}"), &pre, Expr::and(lits), &post));
                }
                let mut tick = 0;
                let events = script
                    .into_iter()
                    .map(|(d, v, val)| {
                        tick += d;
                        ScriptEvent::new(tick, format!("i{v}"), val)
                    })
                    .collect();
                (net, events)
            })
    })
}
