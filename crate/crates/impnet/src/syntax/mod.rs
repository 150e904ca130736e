//! Concrete grammar, parser, abstract syntax, pretty-printer and the
//! desugaring into the dynamic-semantics core language.

pub mod ast;
pub mod core;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{check_bound, BinOp, EventTransformer, Expr, HeaderFn, Lambda, Program, Stmt};
pub use core::{desugar_program, desugar_stmt, desugar_stmts, is_well_structured, Chain, Core};
pub use parser::{parse_event_literal, parse_program, parse_stmt, ParseError};
pub use pretty::{print_program, print_stmt};
