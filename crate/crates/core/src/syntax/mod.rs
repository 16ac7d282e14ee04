//! Lexer, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use lexer::tokenize;
pub use parser::{parse, parse_expr, parse_program};
pub use pretty::print_program as pretty_print;
