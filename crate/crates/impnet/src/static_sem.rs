//! The big-step evaluator: each statement maps a controller state to its
//! successor in one judgment, each event transformer maps the store to a
//! binding. This is one of the two independent evaluators; `dynamic_sem`
//! computes the same results by term rewriting.

use std::collections::BTreeSet;

use crate::domain::{
    binding_as_event, merge_flow_tables, rule_assignments, truthy, ActionSet, Binding, EvalError,
    Event, InitialRules, NetState, Pattern, Rule, RuleEntry, RuleList, Value,
};
use crate::eval::apply_lambda;
use crate::netsim::{run_query, send_event, Network};
use crate::syntax::ast::{check_bound, EventTransformer, Lambda, Program, Stmt};
use crate::syntax::pretty;

/// Execution limits.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Maximum number of statement judgments before aborting (loops).
    pub budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { budget: 1_000_000 }
    }
}

/// One recorded judgment: which rule fired, for which statement, and the
/// state it produced.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub rule: &'static str,
    pub stmt: String,
    pub state: NetState,
}

/// The sequence of statement judgments of a run, in execution order.
#[derive(Debug, Clone, Default)]
pub struct StepTrace(pub Vec<TraceStep>);

impl StepTrace {
    fn push(&mut self, rule: &'static str, stmt: String, state: &NetState) {
        self.0.push(TraceStep {
            rule,
            stmt,
            state: state.clone(),
        });
    }
}

/// Evaluate one event transformer against the store.
pub fn eval_et(
    et: &EventTransformer,
    state: &NetState,
    net: &Network,
) -> Result<Binding, EvalError> {
    let gamma = &state.gamma;
    match et {
        EventTransformer::IntLit(n) => Ok(Binding::Event(Event::new(vec![Value::Int(*n)]))),
        EventTransformer::Lift(x, lam) => {
            et_map(gamma.event(x)?, |v| apply_lambda(lam, v, gamma, net))
        }
        EventTransformer::ApplyLft(x, lam) => et_apply_side(gamma.event(x)?, lam, state, net, true),
        EventTransformer::ApplyRit(x, lam) => et_apply_side(gamma.event(x)?, lam, state, net, false),
        EventTransformer::Merge(x1, x2) => {
            let a = binding_as_event(gamma.get(x1)?);
            let b = binding_as_event(gamma.get(x2)?);
            et_merge(&a, &b)
        }
        EventTransformer::MixFst(set, x1, x2) => {
            et_mix(set, gamma.event(x1)?, gamma.event(x2)?, true)
        }
        EventTransformer::MixSnd(x1, set, x2) => {
            et_mix(set, gamma.event(x1)?, gamma.event(x2)?, false)
        }
        EventTransformer::Filter(x, lam) => et_filter(gamma.event(x)?, lam, state, net),
        EventTransformer::Once(x, n) => et_once(gamma.event(x)?, *n),
        EventTransformer::MakForwRule(x) => et_mak_forw_rule(gamma.event(x)?),
        EventTransformer::MakeRule(x) => et_make_rule(gamma.event(x)?),
    }
}

fn et_map(
    ev: &Event,
    mut f: impl FnMut(&Value) -> Result<Value, EvalError>,
) -> Result<Binding, EvalError> {
    let items: Result<Vec<Value>, EvalError> = ev.iter().map(|v| f(v)).collect();
    Ok(Binding::Event(Event::new(items?)))
}

/// `ApplyLft`/`ApplyRit`: every item must be a pair; the lambda replaces the
/// chosen component, the other is kept.
fn et_apply_side(
    ev: &Event,
    lam: &Lambda,
    state: &NetState,
    net: &Network,
    left: bool,
) -> Result<Binding, EvalError> {
    et_map(ev, |item| match item {
        Value::Tuple(vs) if vs.len() == 2 => {
            let (target, kept) = if left {
                (&vs[0], &vs[1])
            } else {
                (&vs[1], &vs[0])
            };
            let mapped = apply_lambda(lam, target, &state.gamma, net)?;
            Ok(Value::Tuple(if left {
                vec![mapped, kept.clone()]
            } else {
                vec![kept.clone(), mapped]
            }))
        }
        other => Err(EvalError::BadShape(format!(
            "ApplyLft/ApplyRit expects pair items, got {other}"
        ))),
    })
}

/// `Merge`: pair the two events positionally; lengths must agree.
fn et_merge(a: &Event, b: &Event) -> Result<Binding, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let items = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| Value::Tuple(vec![x.clone(), y.clone()]))
        .collect();
    Ok(Binding::Event(Event::new(items)))
}

/// `MixFst`/`MixSnd`: pair the accumulating-side prefix union with the other
/// event's items. For `MixFst` the set grows along the first event and sits
/// in the first component; `MixSnd` mirrors this.
fn et_mix(seed: &ActionSet, acc_ev: &Event, other_ev: &Event, fst: bool) -> Result<Binding, EvalError> {
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
    Ok(Binding::Event(Event::new(items)))
}

/// `Filter`: keep the items on which the predicate yields 1, drop on 0.
fn et_filter(
    ev: &Event,
    lam: &Lambda,
    state: &NetState,
    net: &Network,
) -> Result<Binding, EvalError> {
    let mut items = Vec::new();
    for v in ev.iter() {
        match apply_lambda(lam, v, &state.gamma, net)? {
            Value::Int(0) => {}
            Value::Int(_) => items.push(v.clone()),
            other => return Err(EvalError::NonBoolean(other.to_string())),
        }
    }
    Ok(Binding::Event(Event::new(items)))
}

/// `Once`: replicate the single item of a singleton event `n` times.
fn et_once(ev: &Event, n: u32) -> Result<Binding, EvalError> {
    if n == 0 {
        return Err(EvalError::OnceCount(0));
    }
    match ev.0.as_slice() {
        [v] => Ok(Binding::Event(Event::new(vec![v.clone(); n as usize]))),
        _ => Err(EvalError::BadShape(format!(
            "Once expects a singleton event, got {} items",
            ev.len()
        ))),
    }
}

/// `MakForwRule`: each (switch, port, packet-or-pattern) triple becomes a
/// switch-tagged rule forwarding the matched traffic out of that port.
fn et_mak_forw_rule(ev: &Event) -> Result<Binding, EvalError> {
    let mut entries = Vec::with_capacity(ev.len());
    for item in ev.iter() {
        match item {
            Value::Tuple(vs) => match vs.as_slice() {
                [Value::Switch(sw), port, pat] => {
                    let port = match port {
                        Value::Int(n) | Value::Port(n) => *n,
                        other => {
                            return Err(EvalError::BadShape(format!(
                                "MakForwRule expects an integer port, got {other}"
                            )))
                        }
                    };
                    let pattern = to_pattern(pat)?;
                    entries.push(RuleEntry::ForSwitch(
                        sw.clone(),
                        Rule {
                            pattern,
                            actions: vec![crate::domain::Action::SendOut(port)],
                        },
                    ));
                }
                _ => {
                    return Err(EvalError::BadShape(format!(
                        "MakForwRule expects (switch, port, pattern) triples, got {item}"
                    )))
                }
            },
            _ => {
                return Err(EvalError::BadShape(format!(
                    "MakForwRule expects (switch, port, pattern) triples, got {item}"
                )))
            }
        }
    }
    Ok(Binding::Rules(RuleList(entries)))
}

/// `MakeRule`: each (pattern, action, _) triple becomes a plain rule.
fn et_make_rule(ev: &Event) -> Result<Binding, EvalError> {
    let mut entries = Vec::with_capacity(ev.len());
    for item in ev.iter() {
        match item {
            Value::Tuple(vs) => match vs.as_slice() {
                [pat, Value::Action(a), _] => {
                    entries.push(RuleEntry::Plain(Rule {
                        pattern: to_pattern(pat)?,
                        actions: vec![a.clone()],
                    }));
                }
                _ => {
                    return Err(EvalError::BadShape(format!(
                        "MakeRule expects (pattern, action, _) triples, got {item}"
                    )))
                }
            },
            _ => {
                return Err(EvalError::BadShape(format!(
                    "MakeRule expects (pattern, action, _) triples, got {item}"
                )))
            }
        }
    }
    Ok(Binding::Rules(RuleList(entries)))
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

struct Exec<'a> {
    net: &'a Network,
    cfg: RunConfig,
    steps: u64,
    trace: StepTrace,
}

impl<'a> Exec<'a> {
    fn charge(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.cfg.budget {
            Err(EvalError::BudgetExceeded(self.cfg.budget))
        } else {
            Ok(())
        }
    }

    fn stmt(&mut self, s: &Stmt, state: &mut NetState) -> Result<(), EvalError> {
        self.charge()?;
        match s {
            Stmt::Assign(x, et) => {
                let b = eval_et(et, state, self.net)?;
                state.gamma.bind(x.clone(), b);
                self.trace.push("Assgn", pretty::print_stmt(s), state);
            }
            Stmt::AddRules(x) => {
                let assignments = rule_assignments(state.gamma.get(x)?)?;
                for (sw, r) in assignments {
                    if !self.net.has_switch(&sw) {
                        return Err(EvalError::UnknownSwitch(sw));
                    }
                    state.ir.insert(sw, r);
                }
                self.trace.push("Addrl", pretty::print_stmt(s), state);
            }
            Stmt::Register => {
                state.sigma = merge_flow_tables(&state.sigma, &state.ir);
                state.ir = InitialRules::new();
                self.trace.push("Reg", pretty::print_stmt(s), state);
            }
            Stmt::Send(x) => {
                let ev = state.gamma.event(x)?.clone();
                send_event(&ev, self.net, &mut state.hist)?;
                self.trace.push("Send", pretty::print_stmt(s), state);
            }
            Stmt::If(x, then_b, else_b) => {
                let cond = truthy(state.gamma.get(x)?);
                self.trace.push(
                    if cond { "IfTru" } else { "IfFls" },
                    format!("if ({x})"),
                    state,
                );
                let branch = if cond { then_b } else { else_b };
                self.stmts(branch, state)?;
            }
            Stmt::While(x, body) => loop {
                let cond = truthy(state.gamma.get(x)?);
                self.trace.push(
                    if cond { "WhlTru" } else { "WhlFls" },
                    format!("while ({x})"),
                    state,
                );
                if !cond {
                    break;
                }
                self.stmts(body, state)?;
                self.charge()?;
            },
        }
        Ok(())
    }

    fn stmts(&mut self, stmts: &[Stmt], state: &mut NetState) -> Result<(), EvalError> {
        for s in stmts {
            self.stmt(s, state)?;
        }
        Ok(())
    }
}

/// Run a whole program from an initial store. Definitions execute first, in
/// order, each recorded as a `Def` trace step; then the body.
pub fn run_program(
    p: &Program,
    net: &Network,
    initial: VarStoreInit,
    cfg: RunConfig,
) -> Result<(NetState, StepTrace), EvalError> {
    let names: BTreeSet<String> = initial.0.keys().cloned().collect();
    check_bound(p, &names)?;
    let mut state = NetState::with_gamma(initial);
    let mut exec = Exec {
        net,
        cfg,
        steps: 0,
        trace: StepTrace::default(),
    };
    for (x, q) in &p.defs {
        exec.charge()?;
        let ev = run_query(q, net);
        state.gamma.bind(x.clone(), Binding::Event(ev));
        exec.trace.push("Def", format!("{x} = {q};"), &state);
    }
    exec.stmts(&p.body, &mut state)?;
    Ok((state, exec.trace))
}

/// Initial variable store (external bindings supplied alongside a program).
pub type VarStoreInit = crate::domain::VarStore;
