//! The small-step rewriting evaluator. A configuration holds five cells:
//! the computation chain plus flow tables, variable store, staged rules and
//! history. Reversible structural equations (heating and cooling) move
//! subterms to the head of the chain; irreversible rules do the actual work.
//! The driver heats exhaustively, applies one rule, then cools exhaustively.
//!
//! The transformer and statement rules are implemented independently of the
//! big-step evaluator in `static_sem`; only the value domain, the network
//! effects and the lambda language are shared. Agreement of the two
//! evaluators is checked by the comparison tools.

use std::fmt;

use crate::domain::{
    binding_as_event, merge_flow_tables, rule_assignments, truthy, Binding, EvalError, Event,
    FlowTables, History, InitialRules, NetState, Pattern, Rule, RuleEntry, RuleList, Value,
    VarStore,
};
use crate::eval::apply_lambda;
use crate::netsim::{run_query, send_event, Network};
use crate::syntax::ast::BinOp;
use crate::syntax::{Chain, Core};

/// The five-cell configuration of the rewriting system.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    /// The computation chain; empty means the unit computation ".".
    pub comp: Chain,
    /// Committed flow tables.
    pub swch: FlowTables,
    /// The variable store.
    pub vars: VarStore,
    /// Staged rules awaiting `Register`.
    pub rll: InitialRules,
    /// Per-switch packet-treatment history.
    pub hist: History,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "< ")?;
        if self.comp.is_empty() {
            write!(f, ".")?;
        } else {
            for (i, c) in self.comp.iter().enumerate() {
                if i > 0 {
                    write!(f, " ; ")?;
                }
                write!(f, "{c}")?;
            }
        }
        write!(f, " >")
    }
}

/// Start configuration: the desugared program with the externally supplied
/// store, empty tables, empty reservoir, empty history.
pub fn start_configuration(chain: Chain, initial: VarStore) -> Configuration {
    Configuration {
        comp: chain,
        swch: FlowTables::new(),
        vars: initial,
        rll: InitialRules::new(),
        hist: History::new(),
    }
}

/// A configuration is final when its computation is fully evaluated: the
/// unit computation or a single value.
pub fn is_final(conf: &Configuration) -> bool {
    match conf.comp.as_slice() {
        [] => true,
        [c] => c.is_value(),
        _ => false,
    }
}

/// Whether a step was a reversible structural equation or a rewrite rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Equation,
    Rule,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::Equation => write!(f, "equation"),
            StepKind::Rule => write!(f, "rule"),
        }
    }
}

/// One recorded step with the configurations on both sides.
#[derive(Debug, Clone)]
pub struct RewriteStep {
    pub kind: StepKind,
    pub name: &'static str,
    pub before: Configuration,
    pub after: Configuration,
}

/// One heating equation application at the head of the chain, if any
/// applies. Heating extracts an unevaluated subterm to the head, leaving a
/// frame with a hole behind it.
pub fn heat_step(conf: &Configuration) -> Option<(Configuration, &'static str)> {
    let head = conf.comp.first()?;
    let mut out = conf.clone();
    match head {
        Core::Assign(x, rhs) if heatable(rhs) => {
            let rhs = rhs.as_ref().clone();
            out.comp[0] = Core::Assign(x.clone(), Box::new(Core::Hole));
            out.comp.insert(0, rhs);
            Some((out, "heat-assign"))
        }
        Core::BinOp(op, a, b) if heatable(a) => {
            let sub = a.as_ref().clone();
            out.comp[0] = Core::BinOp(*op, Box::new(Core::Hole), b.clone());
            out.comp.insert(0, sub);
            Some((out, "heat-op-left"))
        }
        Core::BinOp(op, a, b) if a.is_value() && heatable(b) => {
            let sub = b.as_ref().clone();
            out.comp[0] = Core::BinOp(*op, a.clone(), Box::new(Core::Hole));
            out.comp.insert(0, sub);
            Some((out, "heat-op-right"))
        }
        Core::If(cond, t, e) if heatable_cond(cond) => {
            let sub = cond.as_ref().clone();
            out.comp[0] = Core::If(Box::new(Core::Hole), t.clone(), e.clone());
            out.comp.insert(0, sub);
            Some((out, "heat-if"))
        }
        _ => None,
    }
}

/// A subterm worth extracting: not yet a value and not a frame remnant.
fn heatable(c: &Core) -> bool {
    !c.is_value() && !c.contains_hole()
}

/// `If` conditions stay in place when they are a store variable or already
/// an integer; compound conditions are heated out.
fn heatable_cond(c: &Core) -> bool {
    matches!(c, Core::BinOp(..)) && !c.contains_hole()
}

/// One cooling equation: plug the head term back into the hole of the next
/// chain element. Inverse of heating; callers decide when to cool (the
/// driver only cools a fully evaluated head).
pub fn cool_step(conf: &Configuration) -> Option<(Configuration, &'static str)> {
    if conf.comp.len() < 2 || !conf.comp[1].contains_hole() {
        return None;
    }
    let mut out = conf.clone();
    let head = out.comp.remove(0);
    out.comp[0] = plug(&out.comp[0], &head);
    Some((out, "cool"))
}

fn plug(frame: &Core, v: &Core) -> Core {
    match frame {
        Core::Hole => v.clone(),
        Core::BinOp(op, a, b) => {
            if a.contains_hole() {
                Core::BinOp(*op, Box::new(plug(a, v)), b.clone())
            } else {
                Core::BinOp(*op, a.clone(), Box::new(plug(b, v)))
            }
        }
        Core::Assign(x, rhs) => Core::Assign(x.clone(), Box::new(plug(rhs, v))),
        Core::If(c, t, e) => Core::If(Box::new(plug(c, v)), t.clone(), e.clone()),
        other => other.clone(),
    }
}

/// One rewrite rule at the head of the chain.
pub fn rewrite_step(
    conf: &Configuration,
    net: &Network,
) -> Result<Option<(Configuration, &'static str)>, EvalError> {
    let Some(head) = conf.comp.first() else {
        return Ok(None);
    };
    let mut out = conf.clone();
    let name: &'static str;
    match head {
        Core::Query(q) => {
            out.comp[0] = Core::Evt(run_query(q, net));
            name = "Query";
        }
        Core::BinOp(op, a, b) => {
            let (Core::Int(x), Core::Int(y)) = (a.as_ref(), b.as_ref()) else {
                return Ok(None);
            };
            out.comp[0] = Core::Int(op_int(*op, *x, *y));
            name = "OpInt";
        }
        Core::Lift(x, lam) => {
            let src = conf.vars.event(x)?;
            let mut items = Vec::with_capacity(src.len());
            for v in src.iter() {
                items.push(apply_lambda(lam, v, &conf.vars, net)?);
            }
            out.comp[0] = Core::Evt(Event::new(items));
            name = "Lift";
        }
        Core::ApplyLft(x, lam) => {
            out.comp[0] = Core::Evt(apply_component(conf, net, x, lam, true)?);
            name = "ApplyLft";
        }
        Core::ApplyRit(x, lam) => {
            out.comp[0] = Core::Evt(apply_component(conf, net, x, lam, false)?);
            name = "ApplyRit";
        }
        Core::Merge(x1, x2) => {
            let a = binding_as_event(conf.vars.get(x1)?);
            let b = binding_as_event(conf.vars.get(x2)?);
            if a.len() != b.len() {
                return Err(EvalError::LengthMismatch {
                    left: a.len(),
                    right: b.len(),
                });
            }
            let mut items = Vec::with_capacity(a.len());
            for (u, w) in a.iter().zip(b.iter()) {
                items.push(Value::Tuple(vec![u.clone(), w.clone()]));
            }
            out.comp[0] = Core::Evt(Event::new(items));
            name = "Merge";
        }
        Core::MixFst(set, x1, x2) => {
            out.comp[0] = Core::Evt(mix(conf, set, x1, x2, true)?);
            name = "MixFst";
        }
        Core::MixSnd(x1, set, x2) => {
            out.comp[0] = Core::Evt(mix(conf, set, x1, x2, false)?);
            name = "MixSnd";
        }
        Core::Filter(x, lam) => {
            let src = conf.vars.event(x)?;
            let mut items = Vec::new();
            for v in src.iter() {
                match apply_lambda(lam, v, &conf.vars, net)? {
                    Value::Int(0) => {}
                    Value::Int(_) => items.push(v.clone()),
                    other => return Err(EvalError::NonBoolean(other.to_string())),
                }
            }
            out.comp[0] = Core::Evt(Event::new(items));
            name = "Filter";
        }
        Core::Once(x, n) => {
            if *n == 0 {
                return Err(EvalError::OnceCount(0));
            }
            let src = conf.vars.event(x)?;
            let [v] = src.0.as_slice() else {
                return Err(EvalError::BadShape(format!(
                    "Once expects a singleton event, got {} items",
                    src.len()
                )));
            };
            out.comp[0] = Core::Evt(Event::new(vec![v.clone(); *n as usize]));
            name = "Once";
        }
        Core::MakForwRule(x) => {
            let src = conf.vars.event(x)?;
            let mut entries = Vec::with_capacity(src.len());
            for item in src.iter() {
                entries.push(forw_rule_entry(item)?);
            }
            out.comp[0] = Core::Rules(RuleList(entries));
            name = "MakForwRule";
        }
        Core::MakeRule(x) => {
            let src = conf.vars.event(x)?;
            let mut entries = Vec::with_capacity(src.len());
            for item in src.iter() {
                entries.push(plain_rule_entry(item)?);
            }
            out.comp[0] = Core::Rules(RuleList(entries));
            name = "MakeRule";
        }
        Core::Assign(x, rhs) => {
            let b = match rhs.as_ref() {
                Core::Int(n) => Binding::Event(Event::new(vec![Value::Int(*n)])),
                Core::Evt(ev) => Binding::Event(ev.clone()),
                Core::Rules(rl) => Binding::Rules(rl.clone()),
                _ => return Ok(None),
            };
            out.vars.bind(x.clone(), b);
            out.comp.remove(0);
            name = "Assgn";
        }
        Core::AddRules(x) => {
            let assignments = rule_assignments(conf.vars.get(x)?)?;
            for (sw, r) in assignments {
                if !net.has_switch(&sw) {
                    return Err(EvalError::UnknownSwitch(sw));
                }
                out.rll.insert(sw, r);
            }
            out.comp.remove(0);
            name = "Addrl";
        }
        Core::Register => {
            out.swch = merge_flow_tables(&conf.swch, &conf.rll);
            out.rll = InitialRules::new();
            out.comp.remove(0);
            name = "Reg";
        }
        Core::Send(x) => {
            let ev = conf.vars.event(x)?.clone();
            send_event(&ev, net, &mut out.hist)?;
            out.comp.remove(0);
            name = "Send";
        }
        Core::If(cond, t, e) => {
            let taken = match cond.as_ref() {
                Core::Var(x) => truthy(conf.vars.get(x)?),
                Core::Int(n) => *n != 0,
                _ => return Ok(None),
            };
            let branch = if taken { t } else { e };
            let mut comp = branch.clone();
            comp.extend(out.comp.drain(1..));
            out.comp = comp;
            name = if taken { "IfTru" } else { "IfFls" };
        }
        Core::While(x, body) => {
            let mut unrolled = body.clone();
            unrolled.push(Core::While(x.clone(), body.clone()));
            out.comp[0] = Core::If(Box::new(Core::Var(x.clone())), unrolled, Vec::new());
            name = "Whl";
        }
        Core::Int(_) | Core::Evt(_) | Core::Rules(_) | Core::Var(_) | Core::Hole => {
            return Ok(None)
        }
    }
    Ok(Some((out, name)))
}

fn op_int(op: BinOp, x: i64, y: i64) -> i64 {
    match op {
        BinOp::Add => x.wrapping_add(y),
        BinOp::Sub => x.wrapping_sub(y),
        BinOp::Mul => x.wrapping_mul(y),
        BinOp::Eq => i64::from(x == y),
        BinOp::Ne => i64::from(x != y),
        BinOp::Lt => i64::from(x < y),
        BinOp::Le => i64::from(x <= y),
        BinOp::Gt => i64::from(x > y),
        BinOp::Ge => i64::from(x >= y),
    }
}

fn apply_component(
    conf: &Configuration,
    net: &Network,
    x: &str,
    lam: &crate::syntax::Lambda,
    left: bool,
) -> Result<Event, EvalError> {
    let src = conf.vars.event(x)?;
    let mut items = Vec::with_capacity(src.len());
    for item in src.iter() {
        let Value::Tuple(vs) = item else {
            return Err(EvalError::BadShape(format!(
                "ApplyLft/ApplyRit expects pair items, got {item}"
            )));
        };
        if vs.len() != 2 {
            return Err(EvalError::BadShape(format!(
                "ApplyLft/ApplyRit expects pair items, got {item}"
            )));
        }
        let idx = if left { 0 } else { 1 };
        let mapped = apply_lambda(lam, &vs[idx], &conf.vars, net)?;
        let mut pair = vs.clone();
        pair[idx] = mapped;
        items.push(Value::Tuple(pair));
    }
    Ok(Event::new(items))
}

fn mix(
    conf: &Configuration,
    seed: &crate::domain::ActionSet,
    x1: &str,
    x2: &str,
    fst: bool,
) -> Result<Event, EvalError> {
    let (acc_ev, other_ev) = (conf.vars.event(x1)?, conf.vars.event(x2)?);
    if acc_ev.len() != other_ev.len() {
        return Err(EvalError::LengthMismatch {
            left: acc_ev.len(),
            right: other_ev.len(),
        });
    }
    let mut set = seed.clone();
    let mut items = Vec::with_capacity(acc_ev.len());
    for (a, b) in acc_ev.iter().zip(other_ev.iter()) {
        set.insert(a.clone());
        let set_v = Value::ActionSet(set.clone());
        items.push(Value::Tuple(if fst {
            vec![set_v, b.clone()]
        } else {
            vec![b.clone(), set_v]
        }));
    }
    Ok(Event::new(items))
}

fn forw_rule_entry(item: &Value) -> Result<RuleEntry, EvalError> {
    let Value::Tuple(vs) = item else {
        return Err(EvalError::BadShape(format!(
            "MakForwRule expects (switch, port, pattern) triples, got {item}"
        )));
    };
    let [Value::Switch(sw), port, pat] = vs.as_slice() else {
        return Err(EvalError::BadShape(format!(
            "MakForwRule expects (switch, port, pattern) triples, got {item}"
        )));
    };
    let port = match port {
        Value::Int(n) | Value::Port(n) => *n,
        other => {
            return Err(EvalError::BadShape(format!(
                "MakForwRule expects an integer port, got {other}"
            )))
        }
    };
    Ok(RuleEntry::ForSwitch(
        sw.clone(),
        Rule {
            pattern: to_pattern(pat)?,
            actions: vec![crate::domain::Action::SendOut(port)],
        },
    ))
}

fn plain_rule_entry(item: &Value) -> Result<RuleEntry, EvalError> {
    let Value::Tuple(vs) = item else {
        return Err(EvalError::BadShape(format!(
            "MakeRule expects (pattern, action, _) triples, got {item}"
        )));
    };
    let [pat, Value::Action(a), _] = vs.as_slice() else {
        return Err(EvalError::BadShape(format!(
            "MakeRule expects (pattern, action, _) triples, got {item}"
        )));
    };
    Ok(RuleEntry::Plain(Rule {
        pattern: to_pattern(pat)?,
        actions: vec![a.clone()],
    }))
}

fn to_pattern(v: &Value) -> Result<Pattern, EvalError> {
    match v {
        Value::Pattern(p) => Ok(p.clone()),
        Value::Packet(pk) => Ok(Pattern::Exact(pk.clone())),
        other => Err(EvalError::BadShape(format!(
            "{other} is neither a pattern nor a packet"
        ))),
    }
}

/// Run to a final configuration: heat exhaustively, apply one rule, cool
/// exhaustively, repeat. The budget bounds the number of rule applications.
pub fn run_to_final(
    start: Configuration,
    net: &Network,
    budget: u64,
) -> Result<(Configuration, Vec<RewriteStep>), EvalError> {
    let mut conf = start;
    let mut steps = Vec::new();
    let mut rules: u64 = 0;
    loop {
        if let Some((next, name)) = heat_step(&conf) {
            steps.push(RewriteStep {
                kind: StepKind::Equation,
                name,
                before: conf.clone(),
                after: next.clone(),
            });
            conf = next;
            continue;
        }
        if conf.comp.first().is_some_and(Core::is_value) {
            if let Some((next, name)) = cool_step(&conf) {
                steps.push(RewriteStep {
                    kind: StepKind::Equation,
                    name,
                    before: conf.clone(),
                    after: next.clone(),
                });
                conf = next;
                continue;
            }
        }
        if is_final(&conf) {
            return Ok((conf, steps));
        }
        match rewrite_step(&conf, net)? {
            Some((next, name)) => {
                rules += 1;
                if rules > budget {
                    return Err(EvalError::BudgetExceeded(budget));
                }
                steps.push(RewriteStep {
                    kind: StepKind::Rule,
                    name,
                    before: conf.clone(),
                    after: next.clone(),
                });
                conf = next;
            }
            None => {
                let head = conf.comp.first().map(|c| c.to_string()).unwrap_or_default();
                return Err(EvalError::Stuck(head));
            }
        }
    }
}

/// Run a desugared program and return the final cells as a `NetState`.
pub fn run_dynamic(
    chain: Chain,
    net: &Network,
    initial: VarStore,
    budget: u64,
) -> Result<(NetState, Vec<RewriteStep>), EvalError> {
    let (conf, steps) = run_to_final(start_configuration(chain, initial), net, budget)?;
    Ok((
        NetState {
            sigma: conf.swch,
            gamma: conf.vars,
            ir: conf.rll,
            hist: conf.hist,
        },
        steps,
    ))
}

/// Render the recorded steps, one line each: index, step kind, rule or
/// equation name, and which cells changed.
pub fn render_step_log(steps: &[RewriteStep]) -> String {
    let mut out = String::new();
    for (i, s) in steps.iter().enumerate() {
        let mut changed = Vec::new();
        if s.before.comp != s.after.comp {
            changed.push("comp");
        }
        if s.before.swch != s.after.swch {
            changed.push("swch");
        }
        if s.before.vars != s.after.vars {
            changed.push("vars");
        }
        if s.before.rll != s.after.rll {
            changed.push("rll");
        }
        if s.before.hist != s.after.hist {
            changed.push("hist");
        }
        out.push_str(&format!("{i} {} {} | {}\n", s.kind, s.name, changed.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Action, SwitchId};
    use crate::netsim::parse_topology;
    use crate::syntax::{desugar_program, parse_program};

    fn two_switch_net() -> Network {
        parse_topology("switch id1 ports 4\nswitch id2 ports 4\n").unwrap()
    }

    fn conf_with(chain: Chain, pairs: &[(&str, Binding)]) -> Configuration {
        let mut vars = VarStore::new();
        for (x, b) in pairs {
            vars.bind(*x, b.clone());
        }
        start_configuration(chain, vars)
    }

    #[test]
    fn heating_splits_an_assignment_and_cooling_undoes_it() {
        let rhs = Core::BinOp(BinOp::Add, Box::new(Core::Int(1)), Box::new(Core::Int(2)));
        let conf = conf_with(
            vec![Core::Assign("x".into(), Box::new(rhs.clone()))],
            &[],
        );
        let (heated, name) = heat_step(&conf).unwrap();
        assert_eq!(name, "heat-assign");
        assert_eq!(
            heated.comp,
            vec![
                rhs,
                Core::Assign("x".into(), Box::new(Core::Hole)),
            ]
        );
        let (cooled, _) = cool_step(&heated).unwrap();
        assert_eq!(cooled, conf);
    }

    #[test]
    fn equations_touch_only_the_computation_cell() {
        let rhs = Core::BinOp(BinOp::Add, Box::new(Core::Int(1)), Box::new(Core::Int(2)));
        let conf = conf_with(
            vec![Core::Assign("x".into(), Box::new(rhs))],
            &[("y", Binding::Event(Event::new(vec![Value::Int(5)])))],
        );
        let (heated, _) = heat_step(&conf).unwrap();
        assert_eq!(heated.swch, conf.swch);
        assert_eq!(heated.vars, conf.vars);
        assert_eq!(heated.rll, conf.rll);
        assert_eq!(heated.hist, conf.hist);
    }

    #[test]
    fn arithmetic_rule_reduces_integers() {
        let net = Network::default();
        let conf = conf_with(
            vec![Core::BinOp(
                BinOp::Mul,
                Box::new(Core::Int(6)),
                Box::new(Core::Int(7)),
            )],
            &[],
        );
        let (next, name) = rewrite_step(&conf, &net).unwrap().unwrap();
        assert_eq!(name, "OpInt");
        assert_eq!(next.comp, vec![Core::Int(42)]);
        assert!(is_final(&next));
    }

    #[test]
    fn while_unrolls_into_a_conditional_keeping_the_continuation() {
        let net = Network::default();
        let body = vec![Core::Register];
        let conf = conf_with(
            vec![Core::While("x".into(), body.clone()), Core::Send("y".into())],
            &[],
        );
        let (next, name) = rewrite_step(&conf, &net).unwrap().unwrap();
        assert_eq!(name, "Whl");
        assert_eq!(
            next.comp,
            vec![
                Core::If(
                    Box::new(Core::Var("x".into())),
                    vec![Core::Register, Core::While("x".into(), body)],
                    vec![],
                ),
                Core::Send("y".into()),
            ]
        );
    }

    #[test]
    fn a_full_program_reaches_a_final_configuration() {
        let net = two_switch_net();
        let text = "z = Switches;\n>>\n\
                    y := Lift(z, \\t.(t, (srcport(80), sendall, _)));\n\
                    y := ApplyRit(y, \\t.t);\n\
                    w := Merge(z, z);\n\
                    Register;\n";
        let chain = desugar_program(&parse_program(text).unwrap());
        let (state, steps) = run_dynamic(chain, &net, VarStore::new(), 10_000).unwrap();
        assert!(state.ir.is_empty());
        assert!(steps.iter().any(|s| s.kind == StepKind::Rule));
        let log = render_step_log(&steps);
        assert!(log.lines().count() == steps.len());
        assert!(log.contains("rule Query | comp"));
    }

    #[test]
    fn addrl_and_reg_move_rules_between_cells() {
        let net = two_switch_net();
        let rule = Rule {
            pattern: Pattern::SrcPort(80),
            actions: vec![Action::SendAll],
        };
        let conf = conf_with(
            vec![Core::AddRules("w".into()), Core::Register],
            &[(
                "w",
                Binding::Event(Event::new(vec![Value::Tuple(vec![
                    Value::Switch(SwitchId::new("id1")),
                    Value::Rule(rule.clone()),
                ])])),
            )],
        );
        let (staged, name) = rewrite_step(&conf, &net).unwrap().unwrap();
        assert_eq!(name, "Addrl");
        assert_eq!(staged.rll.len(), 1);
        assert!(staged.swch.rules(&SwitchId::new("id1")).is_empty());
        let (committed, name) = rewrite_step(&staged, &net).unwrap().unwrap();
        assert_eq!(name, "Reg");
        assert!(committed.rll.is_empty());
        assert_eq!(committed.swch.rules(&SwitchId::new("id1")), &[rule]);
    }

    #[test]
    fn stuck_heads_report_rather_than_loop() {
        let net = Network::default();
        let conf = conf_with(vec![Core::Var("x".into())], &[]);
        assert_eq!(
            run_to_final(conf, &net, 100).unwrap_err(),
            EvalError::Stuck("x".into())
        );
    }
}
