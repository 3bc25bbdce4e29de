use alloc::string::String;
use alloc::vec::Vec;

use crate::frontend::ScriptEvent;

/// Input changes that share one tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub tick: u64,
    pub changes: Vec<(String, bool)>,
}

/// Where W gets its external events. `Ok(None)` ends the run.
pub trait EventSource {
    fn next_batch(&mut self, tick: u64) -> Result<Option<Batch>, String>;
}

/// A scripted trace, replayed batch by batch.
#[derive(Debug, Clone)]
pub struct ScriptSource {
    events: Vec<ScriptEvent>,
    at: usize,
}

impl ScriptSource {
    pub fn new(events: Vec<ScriptEvent>) -> ScriptSource {
        ScriptSource { events, at: 0 }
    }
}

impl EventSource for ScriptSource {
    fn next_batch(&mut self, tick: u64) -> Result<Option<Batch>, String> {
        let Some(first) = self.events.get(self.at) else { return Ok(None) };
        if first.tick < tick {
            return Err(alloc::format!("event at tick {} is in the past (now {tick})", first.tick));
        }
        let t = first.tick;
        let mut changes = Vec::new();
        while let Some(e) = self.events.get(self.at).filter(|e| e.tick == t) {
            changes.push((e.name.clone(), e.value));
            self.at += 1;
        }
        Ok(Some(Batch { tick: t, changes }))
    }
}

impl<S: EventSource + ?Sized> EventSource for &mut S {
    fn next_batch(&mut self, tick: u64) -> Result<Option<Batch>, String> {
        (**self).next_batch(tick)
    }
}
