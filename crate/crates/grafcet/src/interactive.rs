//! Line-oriented event feed for `sim --interactive`.

use std::io::BufRead;

use grafcet_core::engine::{Batch, EventSource};

/// One assignment `name=0|1` per line; a blank line only advances time;
/// `quit` or end of input stops. Every accepted line is a batch one tick
/// after the current one. Rejected lines are reported on `errors`.
pub struct InteractiveSource<R, W> {
    input: R,
    errors: W,
    names: Vec<String>,
}

impl<R: BufRead, W: std::io::Write> InteractiveSource<R, W> {
    pub fn new(input: R, errors: W, names: Vec<String>) -> Self {
        InteractiveSource { input, errors, names }
    }
}

impl<R: BufRead, W: std::io::Write> EventSource for InteractiveSource<R, W> {
    fn next_batch(&mut self, tick: u64) -> Result<Option<Batch>, String> {
        loop {
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(|e| e.to_string())? == 0 {
                return Ok(None);
            }
            let line = line.trim();
            if line == "quit" {
                return Ok(None);
            }
            if line.is_empty() {
                return Ok(Some(Batch { tick: tick + 1, changes: Vec::new() }));
            }
            let parsed = line.split_once('=').and_then(|(n, v)| {
                let v = match v.trim() {
                    "0" => false,
                    "1" => true,
                    _ => return None,
                };
                Some((n.trim().to_string(), v))
            });
            match parsed {
                Some((name, value)) if self.names.contains(&name) => {
                    return Ok(Some(Batch { tick: tick + 1, changes: vec![(name, value)] }));
                }
                Some((name, _)) => {
                    let _ = writeln!(self.errors, "unknown input {name}");
                }
                None => {
                    let _ =
                        writeln!(self.errors, "cannot read {line:?}: expected name=0, name=1, a blank line or quit");
                }
            }
        }
    }
}
