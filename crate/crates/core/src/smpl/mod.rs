//! Rule-file frontend: data model, parser, validator, and printer.

pub mod ast;
pub mod parser;
pub mod print;
pub mod validate;

pub use ast::*;
pub use parser::parse_rules;
pub use print::print_rules;
pub use validate::validate_rules;
