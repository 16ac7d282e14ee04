//! Interpreters and the oracle checks built on them.

mod check;
mod inputs;
mod machine;
mod reference;
mod value;

pub use check::{check_step_relation, CheckError, Checker};
pub use inputs::{decode_inputs, encode_outputs, random_inputs, InputError};
pub use machine::{eval, InstState, Machine, StepRecord, Trace};
pub use reference::Reference;
pub use value::{binary, unary, EvalError, Value};
