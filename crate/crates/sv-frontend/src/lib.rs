//! Surface syntax of `.sv` programs: lexing, parsing, name resolution,
//! type checking and pretty-printing.

pub mod ast;
mod error;
mod lexer;
mod parser;
mod print;
mod resolve;

pub use ast::*;
pub use error::{FrontendError, Kind};
pub use lexer::{lex, Tok, Token};
pub use parser::{parse_formula, parse_formula_in, parse_program, parse_pure, Parser};
pub use print::{print_expr, print_program, print_stmt};
pub use resolve::resolve;
