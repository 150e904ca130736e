//! The core language of the dynamic semantics and the desugaring from
//! surface syntax. A computation is a chain of core terms processed
//! front-first; the empty chain is the unit computation ".".

use std::fmt;

use super::ast::{BinOp, EventTransformer, Lambda, Program, Stmt};
use crate::domain::{ActionSet, Event, RuleList};
use crate::netsim::Query;

/// A core term. `Evt`/`Rules` are well-evaluated results that only appear
/// during rewriting; `Hole` marks the frozen position of an extracted
/// subterm.
#[derive(Debug, Clone, PartialEq)]
pub enum Core {
    Int(i64),
    Var(String),
    Evt(Event),
    Rules(RuleList),
    Hole,
    BinOp(BinOp, Box<Core>, Box<Core>),
    Query(Query),
    Lift(String, Lambda),
    ApplyLft(String, Lambda),
    ApplyRit(String, Lambda),
    Merge(String, String),
    MixFst(ActionSet, String, String),
    MixSnd(String, ActionSet, String),
    Filter(String, Lambda),
    Once(String, u32),
    MakForwRule(String),
    MakeRule(String),
    Assign(String, Box<Core>),
    AddRules(String),
    Register,
    Send(String),
    If(Box<Core>, Vec<Core>, Vec<Core>),
    While(String, Vec<Core>),
}

/// The computation cell: a sequentialization chain, head processed first.
pub type Chain = Vec<Core>;

impl Core {
    /// A well-evaluated term: a value or rule list.
    pub fn is_value(&self) -> bool {
        matches!(self, Core::Int(_) | Core::Evt(_) | Core::Rules(_))
    }

    pub fn contains_hole(&self) -> bool {
        match self {
            Core::Hole => true,
            Core::BinOp(_, a, b) => a.contains_hole() || b.contains_hole(),
            Core::Assign(_, rhs) => rhs.contains_hole(),
            Core::If(c, _, _) => c.contains_hole(),
            _ => false,
        }
    }
}

impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Core::Int(n) => write!(f, "{n}"),
            Core::Var(x) => write!(f, "{x}"),
            Core::Evt(ev) => write!(f, "{ev}"),
            Core::Rules(rl) => write!(f, "{rl}"),
            Core::Hole => write!(f, "<>"),
            Core::BinOp(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Core::Query(q) => write!(f, "{q}"),
            Core::Lift(x, _) => write!(f, "{x} - lam"),
            Core::ApplyLft(x, _) => write!(f, "({x}, lam)"),
            Core::ApplyRit(x, _) => write!(f, "(lam, {x})"),
            Core::Merge(x1, x2) => write!(f, "({x1}, {x2})"),
            Core::MixFst(a, x1, x2) => write!(f, "({a}, {x1}, {x2})"),
            Core::MixSnd(x1, a, x2) => write!(f, "({x1}, {a}, {x2})"),
            Core::Filter(x, _) => write!(f, "({x}, lam, filter)"),
            Core::Once(x, n) => write!(f, "O({x}, {n})"),
            Core::MakForwRule(x) => write!(f, "F({x})"),
            Core::MakeRule(x) => write!(f, "M({x})"),
            Core::Assign(x, rhs) => write!(f, "{x} := {rhs}"),
            Core::AddRules(x) => write!(f, "A({x})"),
            Core::Register => write!(f, "R"),
            Core::Send(x) => write!(f, "S({x})"),
            Core::If(c, _, _) => write!(f, "If({c}) ..."),
            Core::While(x, _) => write!(f, "While({x}) ..."),
        }
    }
}

/// Desugar a whole program into a chain: each def becomes a query
/// assignment, the body follows. Juxtaposition-sequencing is applied
/// eagerly, so statement order is the chain order.
pub fn desugar_program(p: &Program) -> Chain {
    let mut chain = Chain::new();
    for (x, q) in &p.defs {
        chain.push(Core::Assign(x.clone(), Box::new(Core::Query(q.clone()))));
    }
    chain.extend(desugar_stmts(&p.body));
    chain
}

pub fn desugar_stmts(stmts: &[Stmt]) -> Chain {
    stmts.iter().map(desugar_stmt).collect()
}

pub fn desugar_stmt(s: &Stmt) -> Core {
    match s {
        Stmt::Assign(x, et) => Core::Assign(x.clone(), Box::new(desugar_et(et))),
        Stmt::AddRules(x) => Core::AddRules(x.clone()),
        Stmt::Register => Core::Register,
        Stmt::Send(x) => Core::Send(x.clone()),
        Stmt::If(x, then_b, else_b) => Core::If(
            Box::new(Core::Var(x.clone())),
            desugar_stmts(then_b),
            desugar_stmts(else_b),
        ),
        Stmt::While(x, body) => Core::While(x.clone(), desugar_stmts(body)),
    }
}

pub fn desugar_et(et: &EventTransformer) -> Core {
    match et {
        EventTransformer::IntLit(n) => Core::Int(*n),
        EventTransformer::Lift(x, lam) => Core::Lift(x.clone(), lam.clone()),
        EventTransformer::ApplyLft(x, lam) => Core::ApplyLft(x.clone(), lam.clone()),
        EventTransformer::ApplyRit(x, lam) => Core::ApplyRit(x.clone(), lam.clone()),
        EventTransformer::Merge(x1, x2) => Core::Merge(x1.clone(), x2.clone()),
        EventTransformer::MixFst(a, x1, x2) => Core::MixFst(a.clone(), x1.clone(), x2.clone()),
        EventTransformer::MixSnd(x1, a, x2) => Core::MixSnd(x1.clone(), a.clone(), x2.clone()),
        EventTransformer::Filter(x, lam) => Core::Filter(x.clone(), lam.clone()),
        EventTransformer::Once(x, n) => Core::Once(x.clone(), *n),
        EventTransformer::MakForwRule(x) => Core::MakForwRule(x.clone()),
        EventTransformer::MakeRule(x) => Core::MakeRule(x.clone()),
    }
}

/// Inverse of `desugar_stmt` on the surface image.
pub fn resugar_stmt(c: &Core) -> Option<Stmt> {
    match c {
        Core::Assign(x, rhs) => Some(Stmt::Assign(x.clone(), resugar_et(rhs)?)),
        Core::AddRules(x) => Some(Stmt::AddRules(x.clone())),
        Core::Register => Some(Stmt::Register),
        Core::Send(x) => Some(Stmt::Send(x.clone())),
        Core::If(cond, then_b, else_b) => match cond.as_ref() {
            Core::Var(x) => Some(Stmt::If(
                x.clone(),
                then_b.iter().map(resugar_stmt).collect::<Option<_>>()?,
                else_b.iter().map(resugar_stmt).collect::<Option<_>>()?,
            )),
            _ => None,
        },
        Core::While(x, body) => Some(Stmt::While(
            x.clone(),
            body.iter().map(resugar_stmt).collect::<Option<_>>()?,
        )),
        _ => None,
    }
}

pub fn resugar_et(c: &Core) -> Option<EventTransformer> {
    match c {
        Core::Int(n) => Some(EventTransformer::IntLit(*n)),
        Core::Lift(x, lam) => Some(EventTransformer::Lift(x.clone(), lam.clone())),
        Core::ApplyLft(x, lam) => Some(EventTransformer::ApplyLft(x.clone(), lam.clone())),
        Core::ApplyRit(x, lam) => Some(EventTransformer::ApplyRit(x.clone(), lam.clone())),
        Core::Merge(x1, x2) => Some(EventTransformer::Merge(x1.clone(), x2.clone())),
        Core::MixFst(a, x1, x2) => {
            Some(EventTransformer::MixFst(a.clone(), x1.clone(), x2.clone()))
        }
        Core::MixSnd(x1, a, x2) => {
            Some(EventTransformer::MixSnd(x1.clone(), a.clone(), x2.clone()))
        }
        Core::Filter(x, lam) => Some(EventTransformer::Filter(x.clone(), lam.clone())),
        Core::Once(x, n) => Some(EventTransformer::Once(x.clone(), *n)),
        Core::MakForwRule(x) => Some(EventTransformer::MakForwRule(x.clone())),
        Core::MakeRule(x) => Some(EventTransformer::MakeRule(x.clone())),
        _ => None,
    }
}

/// True iff the chain is the image of a surface term under desugaring:
/// no holes, no partial frames, no already-evaluated results. The empty
/// chain "." is well-evaluated but not well-structured.
pub fn is_well_structured(chain: &Chain) -> bool {
    if chain.is_empty() {
        return false;
    }
    if chain.iter().all(|c| well_structured_stmt(c)) {
        return true;
    }
    // a single event transformer is also a well-structured computation
    chain.len() == 1 && resugar_et(&chain[0]).is_some()
}

fn well_structured_stmt(c: &Core) -> bool {
    match c {
        Core::Assign(x, rhs) => match rhs.as_ref() {
            Core::Query(_) => true,
            other => resugar_stmt(&Core::Assign(x.clone(), Box::new(other.clone()))).is_some(),
        },
        other => resugar_stmt(other).is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_program;

    fn lam_id() -> Lambda {
        Lambda {
            param: "t".into(),
            body: super::super::ast::Expr::Var("t".into()),
        }
    }

    #[test]
    fn desugar_maps_each_surface_form_to_one_core_form() {
        assert_eq!(
            desugar_et(&EventTransformer::Lift("x".into(), lam_id())),
            Core::Lift("x".into(), lam_id())
        );
        assert_eq!(desugar_stmt(&Stmt::Register), Core::Register);
        let w = Stmt::While("x".into(), vec![Stmt::Register]);
        assert_eq!(
            desugar_stmt(&w),
            Core::While("x".into(), vec![Core::Register])
        );
    }

    #[test]
    fn resugar_inverts_desugar() {
        let stmts = vec![
            Stmt::Assign("x".into(), EventTransformer::IntLit(5)),
            Stmt::Assign("y".into(), EventTransformer::MakeRule("x".into())),
            Stmt::AddRules("y".into()),
            Stmt::Register,
            Stmt::Send("y".into()),
            Stmt::If(
                "x".into(),
                vec![Stmt::Register],
                vec![Stmt::Assign("z".into(), EventTransformer::Once("x".into(), 2))],
            ),
            Stmt::While("x".into(), vec![Stmt::Register]),
        ];
        for s in &stmts {
            assert_eq!(resugar_stmt(&desugar_stmt(s)).as_ref(), Some(s));
        }
    }

    #[test]
    fn desugared_programs_are_well_structured_and_surface_free() {
        let text = "z = Switches;\n>>\ny := MakeRule(x);\nAddRules(y);\nRegister;\n";
        let p = parse_program(text).unwrap();
        let chain = desugar_program(&p);
        assert!(is_well_structured(&chain));
        assert!(!chain.iter().any(|c| c.contains_hole()));
    }

    #[test]
    fn heated_frames_are_not_well_structured() {
        let chain = vec![
            Core::BinOp(BinOp::Add, Box::new(Core::Int(1)), Box::new(Core::Int(2))),
            Core::Assign("x".into(), Box::new(Core::Hole)),
        ];
        assert!(!is_well_structured(&chain));
        assert!(!is_well_structured(&vec![]));
    }
}
