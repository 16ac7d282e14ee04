//! Compiler from a synchronous dataflow language with hierarchical
//! automata to modular Horn clauses, with a reference interpreter.

pub mod analysis;
pub mod automaton;
pub mod diag;
pub mod driver;
pub mod horn;
pub mod interp;
pub mod normalize;
pub mod state;
pub mod syntax;
pub mod types;

pub use diag::{Code, Diagnostic, Diagnostics, Pos};
