use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroStatus {
    Inactive,
    Active,
    Complete,
}

impl fmt::Display for MacroStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MacroStatus::Inactive => "inactive",
            MacroStatus::Active => "active",
            MacroStatus::Complete => "complete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Init,
    In { name: String, value: bool },
    Fire(String),
    Deact(String),
    Act(String),
    Task { step: String, index: usize },
    Out { name: String, value: bool },
    Macro { step: String, status: MacroStatus },
    Warn(String),
}

/// One trace line; `Display` gives the exact text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: u64,
    pub kind: EventKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={} ", self.tick)?;
        match &self.kind {
            EventKind::Init => write!(f, "INIT"),
            EventKind::In { name, value } => write!(f, "IN {name}={}", u8::from(*value)),
            EventKind::Fire(t) => write!(f, "FIRE {t}"),
            EventKind::Deact(s) => write!(f, "DEACT {s}"),
            EventKind::Act(s) => write!(f, "ACT {s}"),
            EventKind::Task { step, index } => write!(f, "TASK {step}#{index}"),
            EventKind::Out { name, value } => write!(f, "OUT {name}={}", u8::from(*value)),
            EventKind::Macro { step, status } => write!(f, "MACRO {step} {status}"),
            EventKind::Warn(text) => write!(f, "WARN {text}"),
        }
    }
}

/// Renders a trace, one event per line, each line LF-terminated.
pub fn render_trace(events: &[TraceEvent]) -> String {
    use fmt::Write;
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "{e}");
    }
    out
}
