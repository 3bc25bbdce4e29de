use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::analysis::build_reachability;
use crate::frontend::{parse_script, ScriptEvent};
use crate::ir::{GrafcetNet, Hierarchy};
use crate::testing::{self, arb_net, nested, net, plant};
use crate::transform::flatten;

fn script(text: &str) -> ScriptSource {
    ScriptSource::new(parse_script(text).unwrap())
}

fn lines(trace: &[TraceEvent]) -> Vec<String> {
    trace.iter().map(|e| e.to_string()).collect()
}

fn flat_run(n: &GrafcetNet, config: &EngineConfig, src: &str) -> (Vec<TraceEvent>, Result<(), EngineError>) {
    run(&Model::flat(n).unwrap(), config, script(src))
}

#[test]
fn truck_cycle_matches_golden_trace() {
    let (trace, result) = flat_run(&testing::truck(), &EngineConfig::default(), testing::CYCLE_SCRIPT);
    result.unwrap();
    assert_eq!(render_trace(&trace), testing::TRUCK_TRACE);
}

#[test]
fn determine_follows_receptivity() {
    let model = Model::flat(&testing::truck()).unwrap();
    let e = Engine::at_marking(model.clone(), EngineConfig::default(), &[0], &[false; 4]);
    assert!(e.determine_fireable().is_empty());
    let e = Engine::at_marking(model, EngineConfig::default(), &[0], &[true, false, false, false]);
    assert_eq!(e.determine_fireable(), vec![0]);
}

#[test]
fn first_firing_events() {
    let model = Model::flat(&testing::truck()).unwrap();
    let mut e = Engine::at_marking(model, EngineConfig::default(), &[0], &[true, false, false, false]);
    assert!(e.step());
    assert_eq!(e.marking(), vec![1]);
    assert_eq!(
        lines(&e.take_events()),
        vec!["T=0 FIRE t1", "T=0 DEACT p1", "T=0 ACT p2", "T=0 TASK p2#0", "T=0 OUT R=1"]
    );
}

#[test]
fn runs_are_deterministic() {
    let mixer = net("mixer", testing::MIXER);
    let a = flat_run(&mixer, &EngineConfig::default(), testing::MIXER_SCRIPT);
    let b = flat_run(&mixer, &EngineConfig::default(), testing::MIXER_SCRIPT);
    assert_eq!(a, b);
    a.1.unwrap();
    assert!(lines(&a.0).contains(&"T=7 ACT idle".to_string()));
}

#[test]
fn initial_marking_with_two_steps() {
    let text = "Step s1, s2\nTransition t\nInput a\nMarking s1, s2\nTransitions:\nt: s1 * s2 * a |- @s1\n";
    let (trace, _) = flat_run(&net("two", text), &EngineConfig::default(), "");
    assert_eq!(lines(&trace), vec!["T=0 INIT", "T=0 ACT s1", "T=0 ACT s2"]);
}

#[test]
fn higher_post_priority_fires_first() {
    let text = "Step a, b, lo (P=1), hi (P=5)\nTransition t1, t2\nInput x\nMarking a, b\nTransitions:\n\
        t1: a * x |- @lo\nt2: b * x |- @hi\n";
    let (trace, _) = flat_run(&net("prio", text), &EngineConfig::default(), "1 x=1\n");
    let fires: Vec<String> = lines(&trace).into_iter().filter(|l| l.contains("FIRE")).collect();
    assert_eq!(fires, vec!["T=1 FIRE t2", "T=1 FIRE t1"]);
}

#[test]
fn longest_waiting_pre_step_fires_first() {
    let text = "Step a, b, c, d, e\nTransition t0, t1, t2\nInput x, y\nMarking a, b\nTransitions:\n\
        t0: b * y |- @c\nt1: c * x |- @d\nt2: a * x |- @e\n";
    // b moves to c at tick 3 while a keeps waiting, so at tick 5 a is older.
    let (trace, _) = flat_run(&net("age", text), &EngineConfig::default(), "3 y=1\n5 x=1\n");
    let fires: Vec<String> = lines(&trace).into_iter().filter(|l| l.contains("FIRE")).collect();
    assert_eq!(fires, vec!["T=3 FIRE t0", "T=5 FIRE t2", "T=5 FIRE t1"]);
}

#[test]
fn stale_conflict_partner_is_skipped() {
    let same = net("fig5_same", testing::FIG5_SAME);
    let model = Model::flat(&same).unwrap();
    let mut e = Engine::at_marking(model, EngineConfig::default(), &[0], &[true]);
    assert_eq!(e.determine_fireable(), vec![0, 1]);
    e.step();
    let fires = lines(&e.take_events()).into_iter().filter(|l| l.contains("FIRE")).count();
    assert_eq!(fires, 1);
    assert_eq!(e.marking(), vec![1]);
}

#[test]
fn macrostep_goes_through_three_states() {
    let model = Model::hierarchical(&plant()).unwrap();
    let src = "1 start=1\n2 start=0\n2 go=1\n3 m=1\n4 m=0\n4 b=1\n5 b=0\n5 p=1\n";
    let (trace, result) = run(&model, &EngineConfig::default(), script(src));
    result.unwrap();
    let l = lines(&trace);
    let pos = |s: &str| l.iter().position(|x| x == s).unwrap_or_else(|| panic!("{s} missing in {l:#?}"));
    assert!(pos("T=1 ACT M.p1") < pos("T=1 MACRO M active"));
    // go is already high but M is not complete, so t_b waits.
    assert!(!l.iter().any(|x| x.starts_with("T=2 FIRE t_b") || x.starts_with("T=3 FIRE t_b")));
    assert!(pos("T=5 ACT M.p4") < pos("T=5 MACRO M complete"));
    assert!(pos("T=5 MACRO M complete") < pos("T=5 FIRE t_b"));
    assert!(pos("T=5 FIRE t_b") < pos("T=5 DEACT M.p4"));
    assert!(pos("T=5 DEACT M.p4") < pos("T=5 ACT s9"));
    assert!(pos("T=5 ACT s9") < pos("T=5 MACRO M inactive"));
    let mut e = Engine::new(model, EngineConfig::default());
    e.run(&mut script(src), &mut |_| {}).unwrap();
    assert_eq!(e.marking_text(), "{s9}");
}

#[test]
fn consuming_a_macrostep_clears_its_sub_net() {
    let mut h = plant();
    // Make the exit reachable while another sub-step stays marked.
    let sub = h.nets.get_mut("truck_cycle.gcf").unwrap();
    sub.transitions[0].post.push("p4".into());
    let model = Model::hierarchical(&h).unwrap();
    let src = "1 start=1\n2 m=1\n3 go=1\n";
    let mut e = Engine::new(model, EngineConfig::default());
    e.run(&mut script(src), &mut |_| {}).unwrap();
    assert_eq!(e.marking_text(), "{s9}");
    let m = e.model().step_index("M").unwrap();
    assert_eq!(e.status(m), MacroStatus::Inactive);
}

#[test]
fn initial_macrostep_activates_its_input_step() {
    let mut h = plant();
    h.nets.get_mut("plant").unwrap().initial = vec!["M".into()];
    let (trace, _) = run(&Model::hierarchical(&h).unwrap(), &EngineConfig::default(), script(""));
    assert_eq!(lines(&trace), vec!["T=0 INIT", "T=0 ACT M.p1", "T=0 MACRO M active"]);
}

#[test]
fn budget_spreads_tasks_over_slices() {
    let mixer = net("mixer", testing::MIXER);
    let config = EngineConfig { budget: Some(1), ..EngineConfig::default() };
    let (trace, result) = flat_run(&mixer, &config, testing::MIXER_SCRIPT);
    result.unwrap();
    let l = lines(&trace);
    let at = |s: &str| l.iter().position(|x| x == s).unwrap();
    let (k0, k1, k2) = (at("T=3 TASK mix#0"), at("T=3 TASK mix#1"), at("T=3 TASK mix#2"));
    assert!(k0 + 1 < k1 && k1 + 1 < k2, "{l:#?}");

    let (trace, _) = flat_run(&mixer, &EngineConfig::default(), testing::MIXER_SCRIPT);
    let l = lines(&trace);
    let k0 = l.iter().position(|x| x == "T=3 TASK mix#0").unwrap();
    assert_eq!(l[k0 + 1], "T=3 TASK mix#1");
    assert_eq!(l[k0 + 2], "T=3 TASK mix#2");
}

#[test]
fn outputs_follow_executed_tasks() {
    let mixer = net("mixer", testing::MIXER);
    let config = EngineConfig { budget: Some(1), ..EngineConfig::default() };
    let model = Model::flat(&mixer).unwrap();
    let mut e = Engine::new(model, config);
    let mut src = script("1 go=1\n");
    e.init();
    e.await_event(&mut src).unwrap();
    e.step();
    // fill ran V1 but not yet V2.
    let names: Vec<&str> = e.model().outputs.iter().map(String::as_str).collect();
    let on: Vec<&str> = names.iter().zip(e.outputs()).filter(|(_, v)| **v).map(|(n, _)| *n).collect();
    assert_eq!(on, vec!["V1", "H"]);
}

#[test]
fn shared_output_and_double_activation_warn() {
    let text = "Step s, a, b\nTransition t1, t2\nInput x\nOutput O\nMarking s\nTransitions:\n\
        t1: s * x |- @a @b\nt2: a * !x |- @b\nSteps:\na: |- O\nb: |- O\n";
    let (trace, _) = flat_run(&net("warn", text), &EngineConfig::default(), "1 x=1\n2 x=0\n");
    let l = lines(&trace);
    assert!(l.contains(&"T=1 WARN output O asserted by a, b".to_string()), "{l:#?}");
    assert!(l.contains(&"T=2 WARN b already active".to_string()), "{l:#?}");
}

#[test]
fn divergence_names_the_marking() {
    let text = "Step a, b\nTransition t1, t2\nMarking a\nTransitions:\nt1: a |- @b\nt2: b |- @a\n";
    let config = EngineConfig { divergence_cap: 50, ..EngineConfig::default() };
    let (trace, result) = flat_run(&net("loop", text), &config, "");
    let err = result.unwrap_err();
    assert!(matches!(&err, EngineError::Divergence { firings: 50, .. }));
    assert!(err.to_string().contains("{a}"), "{err}");
    assert_eq!(trace.iter().filter(|e| matches!(e.kind, EventKind::Fire(_))).count(), 50);
}

#[test]
fn script_errors() {
    let (_, result) = flat_run(&testing::truck(), &EngineConfig::default(), "1 q=1\n");
    assert_eq!(result, Err(EngineError::UnknownInput { tick: 1, name: "q".into() }));
    let mut e = Engine::new(Model::flat(&testing::truck()).unwrap(), EngineConfig::default());
    let mut src = script("3 m=1\n");
    e.init();
    e.await_event(&mut src).unwrap();
    assert_eq!(e.tick(), 3);
    assert_eq!(e.elapsed(0), 3);
}

#[test]
fn flat_model_requires_flat_net() {
    assert_eq!(Model::flat(&net("plant", testing::PLANT)), Err(ModelError::NotFlat));
}

/// Trace text with macrostep lines removed.
fn without_macro(trace: &[TraceEvent]) -> Vec<String> {
    trace.iter().filter(|e| !matches!(e.kind, EventKind::Macro { .. })).map(|e| e.to_string()).collect()
}

fn equivalence_scripts(inputs: &[String], seed: u64) -> Vec<ScriptEvent> {
    // Small xorshift so the scripts are fixed but varied.
    let mut x = seed | 1;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x
    };
    let mut events = Vec::new();
    let mut tick = 0;
    for _ in 0..40 {
        tick += next() % 3;
        let name = inputs[(next() % inputs.len() as u64) as usize].clone();
        events.push(ScriptEvent::new(tick, name, next() % 2 == 0));
    }
    events
}

#[test]
fn hierarchy_and_flattened_net_agree() {
    for h in [plant(), nested(2), nested(3)] {
        let hier = Model::hierarchical(&h).unwrap();
        let flat = Model::flat(&flatten(&h).unwrap()).unwrap();
        assert_eq!(hier.inputs, flat.inputs);
        for policy in [SchedulingPolicy::DeclarationOrder, SchedulingPolicy::LowestLevel, SchedulingPolicy::Priority] {
            let config = EngineConfig { policy, ..EngineConfig::default() };
            for seed in 1..=6 {
                let events = equivalence_scripts(&hier.inputs, seed * 7919);
                let (a, ra) = run(&hier, &config, ScriptSource::new(events.clone()));
                let (b, rb) = run(&flat, &config, ScriptSource::new(events));
                assert_eq!(ra, rb);
                assert_eq!(without_macro(&a), without_macro(&b));
            }
        }
    }
}

#[test]
fn lowest_level_policy_serves_root_first() {
    // Two macrosteps whose sub-nets both react to x; under lowest-level the
    // root transition on x fires before either sub-net moves.
    let sub =
        |n: &str| net(n, "Step i (in), o (out)\nTransition go\nInput x\nMarking i\nTransitions:\ngo: i * x |- @o\n");
    let root = net(
        "root",
        "Step A, B, r1, r2\nMacrostep A -> \"a\"\nMacrostep B -> \"b\"\nTransition tr\nInput x\nMarking A, B, r1\n\
         Transitions:\ntr: r1 * x |- @r2\n",
    );
    let mut nets = alloc::collections::BTreeMap::new();
    nets.insert("root".to_string(), root);
    nets.insert("a".to_string(), sub("a"));
    nets.insert("b".to_string(), sub("b"));
    let h = Hierarchy { root: "root".into(), nets };
    let model = Model::hierarchical(&h).unwrap();
    let fires = |policy| {
        let (trace, _) = run(&model, &EngineConfig { policy, ..EngineConfig::default() }, script("1 x=1\n"));
        lines(&trace).into_iter().filter(|l| l.contains("FIRE")).collect::<Vec<_>>()
    };
    assert_eq!(fires(SchedulingPolicy::LowestLevel), vec!["T=1 FIRE tr", "T=1 FIRE A.go", "T=1 FIRE B.go"]);
    assert_eq!(fires(SchedulingPolicy::DeclarationOrder), vec!["T=1 FIRE tr", "T=1 FIRE A.go", "T=1 FIRE B.go"]);
}

#[test]
fn priority_policy_prefers_high_priority_grafcet() {
    let sub = |n: &str, p: u32| {
        net(
            n,
            &alloc::format!(
                "Step i (in), o (out, P={p})\nTransition go\nInput x\nMarking i\nTransitions:\ngo: i * x |- @o\n"
            ),
        )
    };
    let root = net(
        "root",
        "Step A, B\nMacrostep A -> \"a\"\nMacrostep B -> \"b\"\nTransition tr\nInput x\nMarking A, B\n\
         Transitions:\ntr: A * B |- @A\n",
    );
    let mut nets = alloc::collections::BTreeMap::new();
    nets.insert("root".to_string(), root);
    nets.insert("a".to_string(), sub("a", 1));
    nets.insert("b".to_string(), sub("b", 9));
    let model = Model::hierarchical(&Hierarchy { root: "root".into(), nets }).unwrap();
    let config = EngineConfig { policy: SchedulingPolicy::Priority, ..EngineConfig::default() };
    let (trace, _) = run(&model, &config, script("1 x=1\n"));
    let fires: Vec<String> = lines(&trace).into_iter().filter(|l| l.contains("FIRE")).take(2).collect();
    assert_eq!(fires, vec!["T=1 FIRE B.go", "T=1 FIRE A.go"]);
}

/// Markings at every firing boundary, rebuilt from ACT/DEACT lines.
pub(crate) fn visited_markings(trace: &[TraceEvent]) -> Vec<BTreeSet<String>> {
    let mut current = BTreeSet::new();
    let mut out = Vec::new();
    for e in trace {
        match &e.kind {
            EventKind::Fire(_) => out.push(current.clone()),
            EventKind::Act(s) => {
                current.insert(s.clone());
            }
            EventKind::Deact(s) => {
                current.remove(s);
            }
            _ => {}
        }
    }
    out.push(current);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn engine_markings_are_reachable((net, events) in arb_net()) {
        let graph = build_reachability(&net, 1 << 12).unwrap();
        let config = EngineConfig { divergence_cap: 64, ..EngineConfig::default() };
        let (trace, _) = run(&Model::flat(&net).unwrap(), &config, ScriptSource::new(events));
        for m in visited_markings(&trace) {
            let marking = net.marking_of(m.iter().map(String::as_str));
            prop_assert!(graph.contains(&marking), "{:?} not reachable", m);
        }
    }
}
