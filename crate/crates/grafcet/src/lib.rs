//! File formats, the component library and the command-line driver around
//! `grafcet-core`.

pub mod cli;
pub mod graph;
pub mod harness;
pub mod interactive;
pub mod library;
pub mod loader;
pub mod report;

pub use grafcet_core as core;
