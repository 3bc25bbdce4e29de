mod common;

use std::process::Command;

use common::{corpus, grafcet, grafcet_with_input};

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

#[test]
fn check_reports_one_overlapping_conflict_as_warning() {
    let out = grafcet(&["check", &path("fig5.gcf")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("conflicts: 1\n"), "{}", out.stdout);
    assert_eq!(out.stdout.matches("overlapping").count(), 1);
    assert!(out.stdout.contains("warning: conflict"));
}

#[test]
fn strict_check_turns_conflicts_into_errors() {
    let out = grafcet(&["check", "--strict", &path("fig5.gcf")]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("conflict"));
    assert_eq!(grafcet(&["check", "--strict", &path("fig7.gcf")]).code, 0);
}

#[test]
fn check_json_is_machine_readable() {
    let out = grafcet(&["check", "--json", &path("fig5.gcf")]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let pairs = v["pairs"].as_array().unwrap();
    let conflicts: Vec<_> = pairs.iter().filter(|p| p["reachable"] == true && p["rewrite"] != "none").collect();
    assert_eq!(conflicts.len(), 1);
    assert_eq!(conflicts[0]["relation"], "overlapping");
}

#[test]
fn sim_truck_ends_at_p1() {
    let out = grafcet(&["sim", &path("truck.gcf"), "--script", &path("cycle.evt")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, common::corpus_text("truck.trace"));
    let last_act = out.stdout.lines().rfind(|l| l.contains(" ACT ")).unwrap();
    assert!(last_act.ends_with("ACT p1"));
}

#[test]
fn sim_interactive_reads_standard_input() {
    let out = grafcet_with_input(&["sim", &path("truck.gcf"), "--interactive"], "m=1\nbogus\nb=1\nquit\n");
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("T=1 FIRE t1"));
    assert!(out.stdout.contains("T=2 FIRE t2"));
    assert!(out.stderr.contains("bogus"));
}

#[test]
fn sim_hierarchy_emits_macro_events() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.evt");
    std::fs::write(&script, "1 start=1\n2 start=0\n2 m=1\n3 m=0\n3 b=1\n4 b=0\n4 p=1\n5 p=0\n5 go=1\n").unwrap();
    let out = grafcet(&["sim", &path("plant.gcf"), "--script", script.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("MACRO M active"));
    assert!(out.stdout.contains("MACRO M complete"));
    assert!(out.stdout.contains("MACRO M inactive"));
}

#[test]
fn sim_reports_unknown_input() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.evt");
    std::fs::write(&script, "1 q=1\n").unwrap();
    let out = grafcet(&["sim", &path("truck.gcf"), "--script", script.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("q"));
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let out = grafcet(&["gen-c", "missing.gcf"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("missing.gcf"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_grafcet");
    let status = Command::new(bin).args(["gen-c", "missing.gcf"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin).args(["frobnicate"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let out = Command::new(bin).args(["check", &path("truck.gcf")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors() {
    assert_eq!(grafcet(&[]).code, 2);
    assert_eq!(grafcet(&["sim", &path("truck.gcf")]).code, 2);
    assert_eq!(grafcet(&["sim", &path("truck.gcf"), "--script", "x", "--interactive"]).code, 2);
    assert_eq!(grafcet(&["sim", &path("truck.gcf"), "--script", &path("cycle.evt"), "--budget", "0"]).code, 2);
    assert_eq!(grafcet(&["fix-conflicts", &path("fig5.gcf"), "--parallel", "--exclusive"]).code, 2);
    assert_eq!(grafcet(&["--help"]).code, 0);
}

#[test]
fn syntax_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gcf");
    std::fs::write(&bad, "Step p1\nTransition t1\nMarking p1\nTransitions:\nt1: p1 * q |- @p1\n").unwrap();
    let out = grafcet(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("bad.gcf:5:"), "{}", out.stderr);
}

#[test]
fn fmt_is_idempotent_and_converts_dialects() {
    let dir = tempfile::tempdir().unwrap();
    let once = grafcet(&["fmt", &path("truck.gcf")]);
    assert_eq!(once.code, 0);
    let canon = dir.path().join("truck.gcf");
    std::fs::write(&canon, &once.stdout).unwrap();
    assert_eq!(grafcet(&["fmt", canon.to_str().unwrap()]).stdout, once.stdout);

    let json = dir.path().join("truck.gcg");
    assert_eq!(grafcet(&["fmt", &path("truck.gcf"), "-o", json.to_str().unwrap()]).code, 0);
    let back = grafcet(&["fmt", json.to_str().unwrap()]);
    assert!(back.stdout.starts_with('{'));
    let again = dir.path().join("again.gcf");
    assert_eq!(grafcet(&["fmt", json.to_str().unwrap(), "-o", again.to_str().unwrap()]).code, 0);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), once.stdout);
}

#[test]
fn fix_conflicts_writes_a_conflict_free_net() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixed.gcf");
    let run = grafcet(&["fix-conflicts", &path("fig5.gcf"), "--exclusive", "-o", out.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stderr.contains("exclusive rewrite of t1 and t2"));
    let check = grafcet(&["check", "--strict", out.to_str().unwrap()]);
    assert_eq!(check.code, 0);
    assert!(check.stdout.contains("conflicts: 0"));
}

#[test]
fn flatten_and_generators() {
    let flat = grafcet(&["flatten", &path("plant.gcf")]);
    assert_eq!(flat.code, 0, "{}", flat.stderr);
    assert!(flat.stdout.contains("M.p1"));
    assert!(!flat.stdout.contains("Macrostep"));

    let c = grafcet(&["gen-c", &path("plant.gcf"), "--budget", "1"]);
    assert_eq!(c.code, 0);
    assert!(c.stdout.contains("#define BUDGET 1"));

    let pld = grafcet(&["gen-pld", &path("truck.gcf"), "--chip", "TRUCK"]);
    assert_eq!(pld.code, 0);
    assert!(pld.stdout.starts_with("CHIP TRUCK\n"));

    let dot = grafcet(&["export-dot", &path("truck.gcf")]);
    assert!(dot.stdout.starts_with("digraph"));
}
