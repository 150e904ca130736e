//! Pretty-printer. Output reparses to an identical AST.

use super::ast::*;
use crate::domain::ActionSet;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (x, q) in &p.defs {
        out.push_str(&format!("{x} = {q};\n"));
    }
    out.push_str(">>\n");
    print_stmts(&p.body, 0, &mut out);
    out
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    print_stmts(std::slice::from_ref(s), 0, &mut out);
    out.trim_end().to_string()
}

fn print_stmts(stmts: &[Stmt], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    for s in stmts {
        match s {
            Stmt::Assign(x, et) => out.push_str(&format!("{pad}{x} := {};\n", print_et(et))),
            Stmt::AddRules(x) => out.push_str(&format!("{pad}AddRules({x});\n")),
            Stmt::Register => out.push_str(&format!("{pad}Register;\n")),
            Stmt::Send(x) => out.push_str(&format!("{pad}Send({x});\n")),
            Stmt::If(x, then_b, else_b) => {
                out.push_str(&format!("{pad}if ({x}) then {{\n"));
                print_stmts(then_b, indent + 1, out);
                out.push_str(&format!("{pad}}} else {{\n"));
                print_stmts(else_b, indent + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
            Stmt::While(x, body) => {
                out.push_str(&format!("{pad}while ({x}) do {{\n"));
                print_stmts(body, indent + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
        }
    }
}

pub fn print_et(et: &EventTransformer) -> String {
    match et {
        EventTransformer::IntLit(n) => n.to_string(),
        EventTransformer::Lift(x, lam) => format!("Lift({x}, {})", print_lambda(lam)),
        EventTransformer::ApplyLft(x, lam) => format!("ApplyLft({x}, {})", print_lambda(lam)),
        EventTransformer::ApplyRit(x, lam) => format!("ApplyRit({x}, {})", print_lambda(lam)),
        EventTransformer::Merge(x1, x2) => format!("Merge({x1}, {x2})"),
        EventTransformer::MixFst(a, x1, x2) => {
            format!("MixFst({}, {x1}, {x2})", print_action_set(a))
        }
        EventTransformer::MixSnd(x1, a, x2) => {
            format!("MixSnd({x1}, {}, {x2})", print_action_set(a))
        }
        EventTransformer::Filter(x, lam) => format!("Filter({x}, {})", print_lambda(lam)),
        EventTransformer::Once(x, n) => format!("Once({x}, {n})"),
        EventTransformer::MakForwRule(x) => format!("MakForwRule({x})"),
        EventTransformer::MakeRule(x) => format!("MakeRule({x})"),
    }
}

fn print_action_set(a: &ActionSet) -> String {
    let items: Vec<String> = a.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn print_lambda(lam: &Lambda) -> String {
    format!("\\{}.{}", lam.param, print_expr(&lam.body, 1))
}

fn prec(op: BinOp) -> u8 {
    if op.is_comparison() {
        1
    } else if matches!(op, BinOp::Mul) {
        3
    } else {
        2
    }
}

fn print_expr(e: &Expr, min_prec: u8) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Wildcard => "_".to_string(),
        Expr::Var(x) => x.clone(),
        Expr::Tuple(items) => {
            let parts: Vec<String> = items.iter().map(|i| print_expr(i, 1)).collect();
            format!("({})", parts.join(", "))
        }
        Expr::Fst(e) => format!("fst({})", print_expr(e, 1)),
        Expr::Snd(e) => format!("snd({})", print_expr(e, 1)),
        Expr::Port(e) => format!("port({})", print_expr(e, 1)),
        Expr::Switch(e, z) => format!("switch({}, {z})", print_expr(e, 1)),
        Expr::Prohibit(e, z) => format!("prohibit({}, {z})", print_expr(e, 1)),
        Expr::Header(h, e) => format!("{}({})", h.name(), print_expr(e, 1)),
        Expr::SendAll => "sendall".to_string(),
        Expr::SendController => "sendcontroller".to_string(),
        Expr::SendOut(e) => format!("sendout({})", print_expr(e, 1)),
        Expr::Binop(op, a, b) => {
            let p = prec(*op);
            let (lhs, rhs) = if op.is_comparison() {
                // comparisons are non-associative; operands are additive
                (print_expr(a, p + 1), print_expr(b, p + 1))
            } else {
                (print_expr(a, p), print_expr(b, p + 1))
            };
            let s = format!("{lhs} {} {rhs}", op.symbol());
            if p < min_prec {
                format!("({s})")
            } else {
                s
            }
        }
    }
}
