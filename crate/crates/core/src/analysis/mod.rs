//! Static checks: structure, types, clocks, causality.

pub mod clocks;
pub mod schedule;
pub mod structure;
pub mod typing;
pub mod unless;

pub use clocks::{clock_check, Clock, ClockEnv};
pub use schedule::{schedule, schedule_node, EqDeps};
pub use structure::check_structure;
pub use typing::{type_check, TypeEnv};
pub use unless::{check_all_unless, check_unless_memories};

use crate::diag::Diagnostics;
use crate::syntax::ast::SourceProgram;

/// Structure, type and clock checks, stopping at the first failing group.
pub fn check_program(p: &SourceProgram) -> Result<(), Diagnostics> {
    check_structure(p)?;
    type_check(p)?;
    clock_check(p)
}
