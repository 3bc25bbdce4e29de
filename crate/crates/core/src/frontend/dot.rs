use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::ir::GrafcetNet;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c)
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering: steps are boxes (double border when initially
/// active, one more ring for macrosteps), transitions are black bars labeled
/// with their receptivity.
pub fn export_dot(net: &GrafcetNet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&net.name));
    out.push_str("  rankdir=TB;\n");
    for s in &net.steps {
        let initial = net.initial.contains(&s.id);
        let mut label = s.id.clone();
        let mut rings = if initial { 2 } else { 1 };
        if let Some(link) = net.macrosteps.get(&s.id) {
            label = format!("{}\n[{}]", s.id, link);
            rings += 1;
        } else if !s.tasks.is_empty() {
            let tasks: alloc::vec::Vec<String> = s.tasks.iter().map(|t| t.join(" ")).collect();
            label = format!("{}\n{}", s.id, tasks.join(" / "));
        }
        let _ = writeln!(
            out,
            "  {} [shape=box, label={}, peripheries={}];",
            quote(&format!("step:{}", s.id)),
            quote(&label),
            rings
        );
    }
    for t in &net.transitions {
        let _ = writeln!(
            out,
            "  {} [shape=box, style=filled, fillcolor=black, label=\"\", height=0.05, width=0.6, xlabel={}];",
            quote(&format!("transition:{}", t.id)),
            quote(&format!("{}: {}", t.id, t.receptivity))
        );
    }
    for t in &net.transitions {
        let tn = quote(&format!("transition:{}", t.id));
        for p in &t.pre {
            let _ = writeln!(out, "  {} -> {};", quote(&format!("step:{p}")), tn);
        }
        for p in &t.post {
            let _ = writeln!(out, "  {} -> {};", tn, quote(&format!("step:{p}")));
        }
    }
    out.push_str("}\n");
    out
}
