//! Event scripts: `<tick> <name>=<0|1>` per line, `#` comments.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptEvent {
    pub tick: u64,
    pub name: String,
    pub value: bool,
}

impl ScriptEvent {
    pub fn new(tick: u64, name: impl Into<String>, value: bool) -> ScriptEvent {
        ScriptEvent { tick, name: name.into(), value }
    }
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptEvent>, Diagnostic> {
    let mut out: Vec<ScriptEvent> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut words = body.split_whitespace();
        let Some(tick) = words.next() else { continue };
        let col = raw.find(tick).map_or(1, |c| c + 1);
        let tick: u64 = tick.parse().map_err(|_| Diagnostic::error(line, col, format!("invalid tick {tick:?}")))?;
        let Some(assign) = words.next() else {
            return Err(Diagnostic::error(line, col, "expected <name>=<0|1> after the tick"));
        };
        let acol = raw.find(assign).map_or(1, |c| c + 1);
        let (name, value) = assign
            .split_once('=')
            .ok_or_else(|| Diagnostic::error(line, acol, format!("expected <name>=<0|1>, found {assign:?}")))?;
        let value = match value {
            "0" => false,
            "1" => true,
            v => return Err(Diagnostic::error(line, acol, format!("value must be 0 or 1, found {v:?}"))),
        };
        if !crate::ir::is_identifier(name) {
            return Err(Diagnostic::error(line, acol, format!("invalid input name {name:?}")));
        }
        if let Some(extra) = words.next() {
            let ecol = raw.find(extra).map_or(1, |c| c + 1);
            return Err(Diagnostic::error(line, ecol, format!("unexpected {extra:?}")));
        }
        if let Some(prev) = out.last() {
            if tick < prev.tick {
                return Err(Diagnostic::error(line, col, format!("tick {tick} precedes earlier tick {}", prev.tick)));
            }
        }
        out.push(ScriptEvent { tick, name: name.into(), value });
    }
    Ok(out)
}

pub fn render_script(events: &[ScriptEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "{} {}={}", e.tick, e.name, e.value as u8);
    }
    out
}
