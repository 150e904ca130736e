//! Abstract syntax of surface programs.

use std::collections::BTreeSet;

use crate::domain::{ActionSet, EvalError};
use crate::netsim::Query;

/// A program: query definitions followed by a statement sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub defs: Vec<(String, Query)>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign(String, EventTransformer),
    AddRules(String),
    Register,
    Send(String),
    If(String, Vec<Stmt>, Vec<Stmt>),
    While(String, Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventTransformer {
    IntLit(i64),
    Lift(String, Lambda),
    ApplyLft(String, Lambda),
    ApplyRit(String, Lambda),
    Merge(String, String),
    MixFst(ActionSet, String, String),
    MixSnd(String, ActionSet, String),
    Filter(String, Lambda),
    /// `Once` carries an explicit positive replication count.
    Once(String, u32),
    MakForwRule(String),
    MakeRule(String),
}

/// A closed one-parameter function over event items.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda {
    pub param: String,
    pub body: Expr,
}

/// The expression language of lambda bodies: total, no recursion.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Wildcard,
    /// The lambda parameter or a store variable.
    Var(String),
    /// Flat tuple construction, at least two components.
    Tuple(Vec<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// Port through which the packet in the argument arrived.
    Port(Box<Expr>),
    /// The arrival switch of the packet/IP in the argument, drawn from the
    /// switch event bound to the named variable.
    Switch(Box<Expr>, String),
    /// The prohibition action for the argument's IP.
    Prohibit(Box<Expr>, String),
    /// Dual-purpose header function: reads the field of a packet, or
    /// constructs the corresponding pattern from a constant.
    Header(HeaderFn, Box<Expr>),
    SendAll,
    SendController,
    SendOut(Box<Expr>),
    Binop(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderFn {
    SrcIp,
    DstIp,
    SrcPort,
    DstPort,
    InPort,
}

impl HeaderFn {
    pub fn name(self) -> &'static str {
        match self {
            HeaderFn::SrcIp => "srcip",
            HeaderFn::DstIp => "dstip",
            HeaderFn::SrcPort => "srcport",
            HeaderFn::DstPort => "dstport",
            HeaderFn::InPort => "inport",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn is_comparison(self) -> bool {
        !matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }
}

impl Expr {
    /// Store variables referenced by this expression, excluding `param`.
    pub fn free_store_vars(&self, param: &str, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::Wildcard | Expr::SendAll | Expr::SendController => {}
            Expr::Var(x) => {
                if x != param {
                    out.insert(x.clone());
                }
            }
            Expr::Tuple(es) => {
                for e in es {
                    e.free_store_vars(param, out);
                }
            }
            Expr::Fst(e)
            | Expr::Snd(e)
            | Expr::Port(e)
            | Expr::Header(_, e)
            | Expr::SendOut(e) => e.free_store_vars(param, out),
            Expr::Switch(e, z) | Expr::Prohibit(e, z) => {
                out.insert(z.clone());
                e.free_store_vars(param, out);
            }
            Expr::Binop(_, a, b) => {
                a.free_store_vars(param, out);
                b.free_store_vars(param, out);
            }
        }
    }
}

impl EventTransformer {
    /// Variables this transformer reads from the store.
    pub fn read_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            EventTransformer::IntLit(_) => {}
            EventTransformer::Lift(x, lam)
            | EventTransformer::ApplyLft(x, lam)
            | EventTransformer::ApplyRit(x, lam)
            | EventTransformer::Filter(x, lam) => {
                out.insert(x.clone());
                lam.body.free_store_vars(&lam.param, &mut out);
            }
            EventTransformer::Merge(x1, x2) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
            }
            EventTransformer::MixFst(_, x1, x2) | EventTransformer::MixSnd(x1, _, x2) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
            }
            EventTransformer::Once(x, _)
            | EventTransformer::MakForwRule(x)
            | EventTransformer::MakeRule(x) => {
                out.insert(x.clone());
            }
        }
        out
    }
}

/// Check that every variable read by the body is bound by a def, an initial
/// binding, or an earlier assignment on every path. Returns the offending
/// variable on failure.
pub fn check_bound(p: &Program, initial: &BTreeSet<String>) -> Result<(), EvalError> {
    let mut bound: BTreeSet<String> = initial.clone();
    bound.extend(p.defs.iter().map(|(x, _)| x.clone()));
    check_stmts(&p.body, &mut bound)
}

fn check_stmts(stmts: &[Stmt], bound: &mut BTreeSet<String>) -> Result<(), EvalError> {
    for s in stmts {
        match s {
            Stmt::Assign(x, et) => {
                for v in et.read_vars() {
                    if !bound.contains(&v) {
                        return Err(EvalError::UnboundVariable(v));
                    }
                }
                bound.insert(x.clone());
            }
            Stmt::AddRules(x) | Stmt::Send(x) => {
                if !bound.contains(x) {
                    return Err(EvalError::UnboundVariable(x.clone()));
                }
            }
            Stmt::Register => {}
            Stmt::If(x, then_b, else_b) => {
                if !bound.contains(x) {
                    return Err(EvalError::UnboundVariable(x.clone()));
                }
                let mut t = bound.clone();
                check_stmts(then_b, &mut t)?;
                let mut e = bound.clone();
                check_stmts(else_b, &mut e)?;
                // only variables bound on both paths survive the If
                bound.extend(t.intersection(&e).cloned());
            }
            Stmt::While(x, body) => {
                if !bound.contains(x) {
                    return Err(EvalError::UnboundVariable(x.clone()));
                }
                let mut b = bound.clone();
                check_stmts(body, &mut b)?;
                // the body may not run; no new bindings escape
            }
        }
    }
    Ok(())
}
