//! Workbench for the ImpNet controller language: parser, two independent
//! evaluators (a big-step interpreter and a small-step rewriting engine), a
//! simulated switch network, and cross-checking tools.

pub mod cli;
pub mod domain;
pub mod dynamic_sem;
pub mod eval;
pub mod fuzz;
pub mod netsim;
pub mod static_sem;
pub mod syntax;
