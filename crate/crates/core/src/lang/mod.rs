//! The surface language: lexing, parsing, pretty-printing and validation.

mod ast;
mod diag;
mod format;
mod lexer;
mod parser;
mod typed;
mod validate;

pub use ast::*;
pub use diag::{Diagnostic, Severity};
pub use format::format_program;
pub use parser::{parse_atom_by_template, parse_program};
pub use typed::*;
pub use validate::validate;

/// Parses and validates in one step.
pub fn compile(src: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    validate(&parse_program(src)?)
}
