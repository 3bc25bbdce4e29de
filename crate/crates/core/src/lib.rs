//! Core of the grafcet toolchain: the net representation, the rules
//! language, formal analysis, correctness rewrites, the execution engine and
//! the C / PLD generators.
//!
//! The crate is `no_std` and only needs an allocator; file handling lives in
//! the companion `grafcet` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod frontend;
pub mod ir;

pub mod codegen;
pub mod engine;
#[cfg(test)]
pub(crate) mod testing;
pub mod transform;
