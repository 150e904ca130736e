//! Evaluation of lambda bodies over event items. Shared by both semantics:
//! the lambda language is one definition, applied per-item by the static
//! big-step rules and by the dynamic rewrite rules.

use crate::domain::{
    Action, Binding, EvalError, Ip, Packet, Pattern, Value, VarStore,
};
use crate::netsim::Network;
use crate::syntax::ast::{BinOp, Expr, HeaderFn, Lambda};

/// Apply a lambda to one event item.
pub fn apply_lambda(
    lam: &Lambda,
    arg: &Value,
    gamma: &VarStore,
    net: &Network,
) -> Result<Value, EvalError> {
    eval_expr(&lam.body, &lam.param, arg, gamma, net)
}

fn eval_expr(
    e: &Expr,
    param: &str,
    arg: &Value,
    gamma: &VarStore,
    net: &Network,
) -> Result<Value, EvalError> {
    match e {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Wildcard => Ok(Value::Wildcard),
        Expr::Var(x) if x == param => Ok(arg.clone()),
        Expr::Var(x) => lookup_value(x, gamma),
        Expr::Tuple(items) => {
            let vs: Result<Vec<Value>, EvalError> = items
                .iter()
                .map(|i| eval_expr(i, param, arg, gamma, net))
                .collect();
            Ok(Value::Tuple(vs?))
        }
        Expr::Fst(inner) => match eval_expr(inner, param, arg, gamma, net)? {
            Value::Tuple(vs) if !vs.is_empty() => Ok(vs[0].clone()),
            other => Err(EvalError::StuckLambda(format!("fst of non-tuple {other}"))),
        },
        Expr::Snd(inner) => match eval_expr(inner, param, arg, gamma, net)? {
            Value::Tuple(vs) if vs.len() >= 2 => Ok(vs[1].clone()),
            other => Err(EvalError::StuckLambda(format!("snd of non-tuple {other}"))),
        },
        Expr::Port(inner) => {
            let v = eval_expr(inner, param, arg, gamma, net)?;
            arrival_port(&v, net)
        }
        Expr::Switch(inner, z) => {
            let v = eval_expr(inner, param, arg, gamma, net)?;
            arrival_switch(&v, z, gamma, net)
        }
        Expr::Prohibit(inner, _z) => {
            // the prohibition action for the argument's traffic
            eval_expr(inner, param, arg, gamma, net)?;
            Ok(Value::Action(Action::Prohibit))
        }
        Expr::Header(h, inner) => {
            let v = eval_expr(inner, param, arg, gamma, net)?;
            header_fn(*h, &v)
        }
        Expr::SendAll => Ok(Value::Action(Action::SendAll)),
        Expr::SendController => Ok(Value::Action(Action::SendController)),
        Expr::SendOut(inner) => match eval_expr(inner, param, arg, gamma, net)? {
            Value::Int(n) | Value::Port(n) => Ok(Value::Action(Action::SendOut(n))),
            other => Err(EvalError::StuckLambda(format!(
                "sendout of non-integer {other}"
            ))),
        },
        Expr::Binop(op, a, b) => {
            let va = eval_expr(a, param, arg, gamma, net)?;
            let vb = eval_expr(b, param, arg, gamma, net)?;
            eval_binop(*op, &va, &vb)
        }
    }
}

/// A store variable used as a value inside a lambda: rule lists stand for
/// themselves, singleton events for their item.
fn lookup_value(x: &str, gamma: &VarStore) -> Result<Value, EvalError> {
    match gamma.get(x)? {
        Binding::Rules(rl) => Ok(Value::RuleList(rl.clone())),
        Binding::Event(ev) => match ev.0.as_slice() {
            [v] => Ok(v.clone()),
            _ => Err(EvalError::StuckLambda(format!(
                "variable `{x}` holds a {}-item event and cannot be used as a single value",
                ev.len()
            ))),
        },
    }
}

/// First packet reachable in a value, searching tuple components in order.
fn find_packet(v: &Value) -> Option<&Packet> {
    match v {
        Value::Packet(pk) => Some(pk),
        Value::Tuple(vs) => vs.iter().find_map(find_packet),
        _ => None,
    }
}

fn find_ip(v: &Value) -> Option<&Ip> {
    match v {
        Value::Ip(ip) => Some(ip),
        Value::Tuple(vs) => vs.iter().find_map(find_ip),
        _ => None,
    }
}

/// The port through which the packet named by `v` arrived: directly for a
/// packet, via the first pending arrival with matching source IP for an IP.
fn arrival_port(v: &Value, net: &Network) -> Result<Value, EvalError> {
    if let Some(pk) = find_packet(v) {
        return Ok(Value::Port(pk.inport));
    }
    if let Some(ip) = find_ip(v) {
        if let Some((_, pk)) = net.arrival_from(ip) {
            return Ok(Value::Port(pk.inport));
        }
        return Err(EvalError::StuckLambda(format!(
            "port: no pending arrival from {ip}"
        )));
    }
    Err(EvalError::StuckLambda(format!(
        "port: no packet or IP in {v}"
    )))
}

/// The switch at which the packet named by `v` arrived, restricted to the
/// switch event bound to `z`.
fn arrival_switch(
    v: &Value,
    z: &str,
    gamma: &VarStore,
    net: &Network,
) -> Result<Value, EvalError> {
    let allowed = gamma.event(z)?;
    let allows = |sw: &crate::domain::SwitchId| {
        allowed
            .iter()
            .any(|item| matches!(item, Value::Switch(id) if id == sw))
    };
    if let Some(pk) = find_packet(v) {
        if let Some(sw) = net.arrival_of(pk) {
            if allows(sw) {
                return Ok(Value::Switch(sw.clone()));
            }
        }
        return Err(EvalError::StuckLambda(format!(
            "switch: no arrival of {pk} at a switch in `{z}`"
        )));
    }
    if let Some(ip) = find_ip(v) {
        for (sw, pk) in &net.pending {
            if &pk.srcip == ip && allows(sw) {
                return Ok(Value::Switch(sw.clone()));
            }
        }
        return Err(EvalError::StuckLambda(format!(
            "switch: no pending arrival from {ip} at a switch in `{z}`"
        )));
    }
    Err(EvalError::StuckLambda(format!(
        "switch: no packet or IP in {v}"
    )))
}

/// Header functions are dual-purpose: they read the field of a packet and
/// construct the corresponding pattern from a constant.
fn header_fn(h: HeaderFn, v: &Value) -> Result<Value, EvalError> {
    match (h, v) {
        (HeaderFn::SrcIp, Value::Packet(pk)) => Ok(Value::Ip(pk.srcip.clone())),
        (HeaderFn::DstIp, Value::Packet(pk)) => Ok(Value::Ip(pk.dstip.clone())),
        (HeaderFn::SrcPort, Value::Packet(pk)) => Ok(Value::Int(pk.srcport)),
        (HeaderFn::DstPort, Value::Packet(pk)) => Ok(Value::Int(pk.dstport)),
        (HeaderFn::InPort, Value::Packet(pk)) => Ok(Value::Int(pk.inport)),
        (HeaderFn::SrcIp, Value::Ip(a)) => Ok(Value::Pattern(Pattern::SrcIp(a.clone()))),
        (HeaderFn::DstIp, Value::Ip(a)) => Ok(Value::Pattern(Pattern::DstIp(a.clone()))),
        (HeaderFn::SrcPort, Value::Int(n)) => Ok(Value::Pattern(Pattern::SrcPort(*n))),
        (HeaderFn::DstPort, Value::Int(n)) => Ok(Value::Pattern(Pattern::DstPort(*n))),
        (HeaderFn::InPort, Value::Int(n) | Value::Port(n)) => {
            Ok(Value::Pattern(Pattern::InPort(*n)))
        }
        _ => Err(EvalError::StuckLambda(format!(
            "{}({v}) is not defined",
            h.name()
        ))),
    }
}

fn eval_binop(op: BinOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    let as_int = |v: &Value| match v {
        Value::Int(n) | Value::Port(n) => Some(*n),
        _ => None,
    };
    let bool_int = |b: bool| Value::Int(i64::from(b));
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => match (as_int(a), as_int(b)) {
            (Some(x), Some(y)) => Ok(Value::Int(match op {
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                _ => x.wrapping_mul(y),
            })),
            _ => Err(EvalError::StuckLambda(format!(
                "arithmetic on non-integers {a} and {b}"
            ))),
        },
        BinOp::Eq => Ok(bool_int(a == b)),
        BinOp::Ne => Ok(bool_int(a != b)),
        _ => match (as_int(a), as_int(b)) {
            (Some(x), Some(y)) => Ok(bool_int(match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Gt => x > y,
                _ => x >= y,
            })),
            _ => Err(EvalError::StuckLambda(format!(
                "ordering on non-integers {a} and {b}"
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Binding, Event, SwitchId};
    use crate::netsim::parse_topology;

    fn lam(text: &str) -> Lambda {
        // piggyback on the statement parser
        let stmt = crate::syntax::parse_stmt(&format!("x := Lift(y, {text});")).unwrap();
        match stmt {
            crate::syntax::Stmt::Assign(_, crate::syntax::EventTransformer::Lift(_, l)) => l,
            _ => unreachable!(),
        }
    }

    fn net_with_arrivals() -> Network {
        parse_topology(
            "switch id1 ports 4\n\
             switch id2 ports 4\n\
             packet id1 srcip=10.0.0.1 dstip=9.9.9.9 srcport=80 dstport=99 inport=2\n\
             packet id2 srcip=10.0.0.2 dstip=9.9.9.9 srcport=22 dstport=99 inport=3\n",
        )
        .unwrap()
    }

    #[test]
    fn identity_pairing_and_store_vars() {
        let net = Network::default();
        let mut gamma = VarStore::new();
        gamma.bind("y", Binding::Event(Event::new(vec![Value::Int(7)])));
        assert_eq!(
            apply_lambda(&lam("\\t.t"), &Value::Int(1), &gamma, &net).unwrap(),
            Value::Int(1)
        );
        assert_eq!(
            apply_lambda(&lam("\\t.(t, y)"), &Value::Int(1), &gamma, &net).unwrap(),
            Value::Tuple(vec![Value::Int(1), Value::Int(7)])
        );
    }

    #[test]
    fn port_and_switch_builtins_resolve_arrivals() {
        let net = net_with_arrivals();
        let mut gamma = VarStore::new();
        gamma.bind(
            "z",
            Binding::Event(Event::new(vec![
                Value::Switch(SwitchId::new("id1")),
                Value::Switch(SwitchId::new("id2")),
            ])),
        );
        let ip1 = Value::Ip(Ip::new("10.0.0.1"));
        assert_eq!(
            apply_lambda(&lam("\\t.port(t)"), &ip1, &gamma, &net).unwrap(),
            Value::Port(2)
        );
        let pair = Value::Tuple(vec![
            Value::Port(2),
            Value::Packet(net.pending[0].1.clone()),
        ]);
        assert_eq!(
            apply_lambda(&lam("\\t.switch(t, z)"), &pair, &gamma, &net).unwrap(),
            Value::Switch(SwitchId::new("id1"))
        );
    }

    #[test]
    fn header_functions_read_and_construct() {
        let net = net_with_arrivals();
        let gamma = VarStore::new();
        let pk = Value::Packet(net.pending[0].1.clone());
        assert_eq!(
            apply_lambda(&lam("\\t.srcport(t)"), &pk, &gamma, &net).unwrap(),
            Value::Int(80)
        );
        assert_eq!(
            apply_lambda(&lam("\\t.srcport(80)"), &Value::Int(0), &gamma, &net).unwrap(),
            Value::Pattern(Pattern::SrcPort(80))
        );
        assert_eq!(
            apply_lambda(&lam("\\t.srcip(t)"), &Value::Ip(Ip::new("10.0.0.1")), &gamma, &net)
                .unwrap(),
            Value::Pattern(Pattern::SrcIp(Ip::new("10.0.0.1")))
        );
    }

    #[test]
    fn comparisons_yield_zero_one() {
        let net = Network::default();
        let gamma = VarStore::new();
        assert_eq!(
            apply_lambda(&lam("\\t.t > 2"), &Value::Int(3), &gamma, &net).unwrap(),
            Value::Int(1)
        );
        assert_eq!(
            apply_lambda(&lam("\\t.t > 2"), &Value::Int(2), &gamma, &net).unwrap(),
            Value::Int(0)
        );
    }

    #[test]
    fn stuck_terms_error_rather_than_diverge() {
        let net = Network::default();
        let gamma = VarStore::new();
        assert!(apply_lambda(&lam("\\t.fst(t)"), &Value::Int(1), &gamma, &net).is_err());
        assert!(apply_lambda(&lam("\\t.t + 1"), &Value::Wildcard, &gamma, &net).is_err());
        assert!(apply_lambda(&lam("\\t.q"), &Value::Int(1), &gamma, &net).is_err());
    }
}
