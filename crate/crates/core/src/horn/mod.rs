//! Modular Horn clause generation.

mod encode;
mod system;
mod term;

pub use encode::{encode_program, reset_name, step_name, Target, ERR, REACH};
pub use system::{HornSystem, Relation, Rule};
pub use term::{sort, Term};
