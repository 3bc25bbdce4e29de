//! Backends: a self-contained C controller and one-hot PLD equations.

mod c;
mod pld;

pub use c::{gen_c, CodegenError};
pub use pld::{
    gen_pld_equations, render_palasm, simulate_equations, OutputEquation, PldEquationSet, PldError, Signals,
    StepEquation, INIT_SIGNAL,
};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    C,
    Pld,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedSource {
    pub target: Target,
    pub text: String,
    /// Names the text defines: step action functions for C, signals for PLD.
    pub symbols: Vec<String>,
}
