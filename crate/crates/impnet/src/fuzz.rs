//! Randomized testing: a generator for topologies and well-shaped closed
//! programs, a differential runner that executes every case under both
//! evaluators, and a purely syntactic program generator for parser/printer
//! round-trips.

use std::fmt::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::domain::{ActionSet, EvalError, NetState, Value, VarStore};
use crate::netsim::{parse_topology, Network};
use crate::static_sem::{run_program, RunConfig};
use crate::syntax::ast::{BinOp, EventTransformer, Expr, HeaderFn, Lambda, Program, Stmt};
use crate::syntax::{desugar_program, print_program};

#[derive(Debug, Clone, Copy)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: u32,
    pub max_size: u32,
    pub budget: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 1,
            count: 1000,
            max_size: 20,
            budget: 1_000_000,
        }
    }
}

/// One case where the two evaluators disagreed.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub case: u32,
    pub program: String,
    pub topology: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub cases: u32,
    pub disagreements: Vec<Disagreement>,
}

/// What a generated variable holds, tracked so every generated statement is
/// applicable under both evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// Event of integers.
    Ints,
    /// Event of (int, int) pairs.
    IntPairs,
    /// Event of (ip, packet) pairs.
    IpPkt,
    /// Event of (pattern, action, _) triples.
    RuleTriples,
    /// Event of (switch, port, packet) triples.
    ForwTriples,
    /// Event of (switch, rule) pairs.
    SwitchRulePairs,
    /// Event of (switch, packet, action) triples.
    SendTriples,
    /// A rule list with per-switch assignments.
    ForwRules,
    /// A plain rule list.
    PlainRules,
    /// Anything else; only usable as a branch condition.
    Opaque,
}

#[derive(Debug, Clone, Copy)]
struct VarInfo {
    shape: Shape,
    /// Item count when statically known (lost by `Filter`).
    len: Option<usize>,
}

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<(String, VarInfo)>,
    next_id: u32,
    /// Remaining statement budget for the case being generated.
    left: u32,
    n_switches: usize,
    n_pending: usize,
}

impl Gen {
    fn fresh(&mut self, info: VarInfo) -> String {
        let name = format!("v{}", self.next_id);
        self.next_id += 1;
        self.vars.push((name.clone(), info));
        name
    }

    fn pick(&mut self, shape: Shape) -> Option<(String, VarInfo)> {
        let candidates: Vec<&(String, VarInfo)> = self
            .vars
            .iter()
            .filter(|(_, i)| i.shape == shape)
            .collect();
        candidates.choose(&mut self.rng).map(|c| (*c).clone())
    }

    fn pick_with_len(&mut self, shape: Shape, len: usize) -> Option<String> {
        let candidates: Vec<String> = self
            .vars
            .iter()
            .filter(|(_, i)| i.shape == shape && i.len == Some(len))
            .map(|(n, _)| n.clone())
            .collect();
        candidates.choose(&mut self.rng).cloned()
    }
}

fn lam(param: &str, body: Expr) -> Lambda {
    Lambda {
        param: param.to_string(),
        body,
    }
}

fn var(x: &str) -> Expr {
    Expr::Var(x.to_string())
}

/// Generate a random topology and its source text. Always at least two
/// switches; pending packets and prohibited IPs are drawn consistently.
pub fn gen_topology(rng: &mut ChaCha8Rng) -> (Network, String) {
    let n_switches = rng.gen_range(2..=4);
    let ports = 4;
    let mut text = String::new();
    for i in 0..n_switches {
        writeln!(text, "switch s{i} ports {ports}").unwrap();
    }
    if n_switches >= 2 && rng.gen_bool(0.8) {
        writeln!(text, "link s0:1 s1:1").unwrap();
    }
    let n_pending = rng.gen_range(0..=3);
    for i in 0..n_pending {
        let sw = rng.gen_range(0..n_switches);
        let srcport = [22, 80, 443][rng.gen_range(0..3)];
        let inport = rng.gen_range(1..=ports);
        writeln!(
            text,
            "packet s{sw} srcip=10.0.0.{} dstip=9.9.9.9 srcport={srcport} dstport=99 inport={inport}",
            i + 1
        )
        .unwrap();
    }
    for i in 0..n_pending {
        if rng.gen_bool(0.4) {
            writeln!(text, "prohibited 10.0.0.{}", i + 1).unwrap();
        }
    }
    let net = parse_topology(&text).expect("generated topology is valid");
    (net, text)
}

/// Generate one semantically well-shaped case: a topology plus a closed
/// program whose statements are all applicable.
pub fn gen_case(rng: &mut ChaCha8Rng, max_size: u32) -> (Network, String, Program) {
    let (net, topo_text) = gen_topology(rng);
    let n_switches = net.switches.len();
    let n_pending = net.pending.len();
    let mut g = Gen {
        rng: rng.clone(),
        vars: Vec::new(),
        next_id: 0,
        left: max_size.max(3),
        n_switches,
        n_pending,
    };

    let mut defs = vec![("qsw".to_string(), crate::netsim::Query::Switches)];
    g.vars.push((
        "qsw".into(),
        VarInfo {
            shape: Shape::Opaque,
            len: Some(n_switches),
        },
    ));
    if g.rng.gen_bool(0.8) {
        defs.push((
            "qpk".to_string(),
            crate::netsim::Query::Packets(crate::domain::Pattern::MatchAll),
        ));
        g.vars.push((
            "qpk".into(),
            VarInfo {
                shape: Shape::Opaque,
                len: Some(n_pending),
            },
        ));
    }
    if g.rng.gen_bool(0.5) {
        defs.push(("qip".to_string(), crate::netsim::Query::SourceIps));
        g.vars.push((
            "qip".into(),
            VarInfo {
                shape: Shape::IpPkt,
                len: Some(n_pending),
            },
        ));
    }

    let mut body = Vec::new();
    while g.left > 0 {
        let mut chunk = gen_stmts(&mut g, 0);
        body.append(&mut chunk);
    }
    if body.is_empty() {
        body.push(Stmt::Register);
    }
    *rng = g.rng.clone();
    (net, topo_text, Program { defs, body })
}

/// Generate a run of statements, consuming from the budget. Depth limits
/// branch nesting.
fn gen_stmts(g: &mut Gen, depth: u32) -> Vec<Stmt> {
    let choice = g.rng.gen_range(0..12);
    match choice {
        0 => {
            g.left = g.left.saturating_sub(1);
            let n = g.rng.gen_range(0..5);
            let x = g.fresh(VarInfo {
                shape: Shape::Ints,
                len: Some(1),
            });
            vec![Stmt::Assign(x, EventTransformer::IntLit(n))]
        }
        1 => ints_pipeline(g),
        2 => pair_pipeline(g),
        3 => filter_stmt(g),
        4 => merge_stmt(g),
        5 => mix_stmt(g),
        6 => once_stmt(g),
        7 => make_rule_pipeline(g),
        8 => forw_rule_pipeline(g),
        9 => send_pipeline(g),
        10 if depth < 2 => if_block(g, depth),
        11 if depth < 2 => while_block(g, depth),
        _ => {
            g.left = g.left.saturating_sub(1);
            vec![Stmt::Register]
        }
    }
}

/// `x := Lift(qsw-or-ints, \t.int-expr)` producing an integer event.
fn ints_pipeline(g: &mut Gen) -> Vec<Stmt> {
    g.left = g.left.saturating_sub(1);
    let (src, len) = match g.pick(Shape::Ints) {
        Some((n, i)) if g.rng.gen_bool(0.6) => (n, i.len),
        _ => ("qsw".to_string(), Some(g.n_switches)),
    };
    let body = if g.vars.iter().any(|(n, _)| n == &src && matches!(g_shape(g, n), Shape::Ints)) {
        let k = g.rng.gen_range(0..5);
        Expr::Binop(
            [BinOp::Add, BinOp::Sub, BinOp::Mul][g.rng.gen_range(0..3)],
            Box::new(var("t")),
            Box::new(Expr::Int(k)),
        )
    } else {
        // switches are opaque; map them to a constant integer
        Expr::Int(g.rng.gen_range(0..5))
    };
    let x = g.fresh(VarInfo {
        shape: Shape::Ints,
        len,
    });
    vec![Stmt::Assign(x, EventTransformer::Lift(src, lam("t", body)))]
}

fn g_shape(g: &Gen, name: &str) -> Shape {
    g.vars
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, i)| i.shape)
        .unwrap_or(Shape::Opaque)
}

/// Build int pairs, then rewrite one side with `ApplyLft`/`ApplyRit`.
fn pair_pipeline(g: &mut Gen) -> Vec<Stmt> {
    g.left = g.left.saturating_sub(2);
    let mut out = Vec::new();
    let (src, len) = match g.pick(Shape::Ints) {
        Some((n, i)) => (n, i.len),
        None => {
            let x = g.fresh(VarInfo {
                shape: Shape::Ints,
                len: Some(1),
            });
            out.push(Stmt::Assign(x.clone(), EventTransformer::IntLit(3)));
            (x, Some(1))
        }
    };
    let pairs = g.fresh(VarInfo {
        shape: Shape::IntPairs,
        len,
    });
    out.push(Stmt::Assign(
        pairs.clone(),
        EventTransformer::Lift(src, lam("t", Expr::Tuple(vec![var("t"), var("t")]))),
    ));
    let k = g.rng.gen_range(1..4);
    let mapped = g.fresh(VarInfo {
        shape: Shape::IntPairs,
        len,
    });
    let f = lam(
        "t",
        Expr::Binop(BinOp::Add, Box::new(var("t")), Box::new(Expr::Int(k))),
    );
    let et = if g.rng.gen_bool(0.5) {
        EventTransformer::ApplyLft(pairs, f)
    } else {
        EventTransformer::ApplyRit(pairs, f)
    };
    out.push(Stmt::Assign(mapped, et));
    out
}

fn filter_stmt(g: &mut Gen) -> Vec<Stmt> {
    let Some((src, _)) = g.pick(Shape::Ints) else {
        return ints_pipeline(g);
    };
    g.left = g.left.saturating_sub(1);
    let k = g.rng.gen_range(0..6);
    let op = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne]
        [g.rng.gen_range(0..6)];
    let x = g.fresh(VarInfo {
        shape: Shape::Ints,
        len: None,
    });
    vec![Stmt::Assign(
        x,
        EventTransformer::Filter(
            src,
            lam(
                "t",
                Expr::Binop(op, Box::new(var("t")), Box::new(Expr::Int(k))),
            ),
        ),
    )]
}

fn merge_stmt(g: &mut Gen) -> Vec<Stmt> {
    let Some((a, info)) = g.pick(Shape::Ints) else {
        return ints_pipeline(g);
    };
    let Some(len) = info.len else {
        return filter_stmt(g);
    };
    let Some(b) = g.pick_with_len(Shape::Ints, len) else {
        return ints_pipeline(g);
    };
    g.left = g.left.saturating_sub(1);
    let x = g.fresh(VarInfo {
        shape: Shape::IntPairs,
        len: Some(len),
    });
    vec![Stmt::Assign(x, EventTransformer::Merge(a, b))]
}

fn mix_stmt(g: &mut Gen) -> Vec<Stmt> {
    let Some((a, info)) = g.pick(Shape::Ints) else {
        return ints_pipeline(g);
    };
    let Some(len) = info.len else {
        return filter_stmt(g);
    };
    let Some(b) = g.pick_with_len(Shape::Ints, len) else {
        return ints_pipeline(g);
    };
    g.left = g.left.saturating_sub(1);
    let seed = ActionSet::from_values(
        (0..g.rng.gen_range(0..3)).map(|_| Value::Int(g.rng.gen_range(0..4))),
    );
    let x = g.fresh(VarInfo {
        shape: Shape::Opaque,
        len: Some(len),
    });
    let et = if g.rng.gen_bool(0.5) {
        EventTransformer::MixFst(seed, a, b)
    } else {
        EventTransformer::MixSnd(a, seed, b)
    };
    vec![Stmt::Assign(x, et)]
}

fn once_stmt(g: &mut Gen) -> Vec<Stmt> {
    let Some(src) = g.pick_with_len(Shape::Ints, 1) else {
        return ints_pipeline(g);
    };
    g.left = g.left.saturating_sub(1);
    let n = g.rng.gen_range(1..5u32);
    let x = g.fresh(VarInfo {
        shape: Shape::Ints,
        len: Some(n as usize),
    });
    vec![Stmt::Assign(x, EventTransformer::Once(src, n))]
}

/// Rule installation via `MakeRule`: build triples from the switch event,
/// make plain rules, pair them back with switches, stage and commit.
fn make_rule_pipeline(g: &mut Gen) -> Vec<Stmt> {
    g.left = g.left.saturating_sub(5);
    let port = [22, 80, 443][g.rng.gen_range(0..3)];
    let action = if g.rng.gen_bool(0.5) {
        Expr::SendAll
    } else {
        Expr::SendController
    };
    let triples = g.fresh(VarInfo {
        shape: Shape::RuleTriples,
        len: Some(g.n_switches),
    });
    let rules = g.fresh(VarInfo {
        shape: Shape::PlainRules,
        len: Some(g.n_switches),
    });
    let paired = g.fresh(VarInfo {
        shape: Shape::SwitchRulePairs,
        len: Some(g.n_switches),
    });
    vec![
        Stmt::Assign(
            triples.clone(),
            EventTransformer::Lift(
                "qsw".into(),
                lam(
                    "t",
                    Expr::Tuple(vec![
                        Expr::Header(HeaderFn::SrcPort, Box::new(Expr::Int(port))),
                        action,
                        Expr::Wildcard,
                    ]),
                ),
            ),
        ),
        Stmt::Assign(rules.clone(), EventTransformer::MakeRule(triples)),
        Stmt::Assign(paired.clone(), EventTransformer::Merge("qsw".into(), rules)),
        Stmt::AddRules(paired),
        Stmt::Register,
    ]
}

/// Rule installation via `MakForwRule` over the pending packets.
fn forw_rule_pipeline(g: &mut Gen) -> Vec<Stmt> {
    if !g.vars.iter().any(|(n, _)| n == "qpk") {
        return make_rule_pipeline(g);
    }
    g.left = g.left.saturating_sub(4);
    let triples = g.fresh(VarInfo {
        shape: Shape::ForwTriples,
        len: Some(g.n_pending),
    });
    let rules = g.fresh(VarInfo {
        shape: Shape::ForwRules,
        len: Some(g.n_pending),
    });
    vec![
        Stmt::Assign(
            triples.clone(),
            EventTransformer::Lift(
                "qpk".into(),
                lam(
                    "t",
                    Expr::Tuple(vec![
                        Expr::Switch(Box::new(var("t")), "qsw".into()),
                        Expr::Port(Box::new(var("t"))),
                        var("t"),
                    ]),
                ),
            ),
        ),
        Stmt::Assign(rules.clone(), EventTransformer::MakForwRule(triples)),
        Stmt::AddRules(rules),
        Stmt::Register,
    ]
}

/// Treat every pending packet at its arrival switch and record it.
fn send_pipeline(g: &mut Gen) -> Vec<Stmt> {
    if !g.vars.iter().any(|(n, _)| n == "qpk") {
        return make_rule_pipeline(g);
    }
    g.left = g.left.saturating_sub(2);
    let triples = g.fresh(VarInfo {
        shape: Shape::SendTriples,
        len: Some(g.n_pending),
    });
    vec![
        Stmt::Assign(
            triples.clone(),
            EventTransformer::Lift(
                "qpk".into(),
                lam(
                    "t",
                    Expr::Tuple(vec![
                        Expr::Switch(Box::new(var("t")), "qsw".into()),
                        var("t"),
                        Expr::SendController,
                    ]),
                ),
            ),
        ),
        Stmt::Send(triples),
    ]
}

fn if_block(g: &mut Gen, depth: u32) -> Vec<Stmt> {
    g.left = g.left.saturating_sub(2);
    let c = g.fresh(VarInfo {
        shape: Shape::Ints,
        len: Some(1),
    });
    let cond_val = i64::from(g.rng.gen_bool(0.5));
    // assignments inside a branch are not visible afterwards; restore the
    // tracked scope so later statements never read branch-local variables
    let scope = g.vars.clone();
    let mut then_b = gen_stmts(g, depth + 1);
    if then_b.is_empty() {
        then_b.push(Stmt::Register);
    }
    g.vars = scope.clone();
    let mut else_b = gen_stmts(g, depth + 1);
    if else_b.is_empty() {
        else_b.push(Stmt::Register);
    }
    g.vars = scope;
    vec![
        Stmt::Assign(c.clone(), EventTransformer::IntLit(cond_val)),
        Stmt::If(c, then_b, else_b),
    ]
}

/// A loop that runs exactly once: the body clears its own condition.
fn while_block(g: &mut Gen, depth: u32) -> Vec<Stmt> {
    g.left = g.left.saturating_sub(3);
    let c = g.fresh(VarInfo {
        shape: Shape::Ints,
        len: Some(1),
    });
    let scope = g.vars.clone();
    let mut body = gen_stmts(g, depth + 1);
    body.push(Stmt::Assign(c.clone(), EventTransformer::IntLit(0)));
    g.vars = scope;
    vec![
        Stmt::Assign(c.clone(), EventTransformer::IntLit(1)),
        Stmt::While(c, body),
    ]
}

/// Run one program under both evaluators and compare the final states
/// field by field.
pub fn compare_case(
    p: &Program,
    net: &Network,
    initial: &VarStore,
    budget: u64,
) -> Result<(), String> {
    let st = run_program(p, net, initial.clone(), RunConfig { budget });
    // the binding check is a shared front end, not part of either
    // semantics; apply it on the rewriting side too
    let names = initial.0.keys().cloned().collect();
    let dy: Result<NetState, EvalError> =
        crate::syntax::check_bound(p, &names).and_then(|()| {
            crate::dynamic_sem::run_dynamic(desugar_program(p), net, initial.clone(), budget)
                .map(|(state, _)| state)
        });
    match (st, dy) {
        (Ok((a, _)), Ok(b)) => diff_states(&a, &b),
        (Err(ea), Err(eb)) => {
            if ea == eb {
                Ok(())
            } else {
                Err(format!("different errors: big-step `{ea}` vs rewriting `{eb}`"))
            }
        }
        (Ok(_), Err(e)) => Err(format!("big-step succeeded but rewriting failed: {e}")),
        (Err(e), Ok(_)) => Err(format!("rewriting succeeded but big-step failed: {e}")),
    }
}

/// Field-level comparison naming the cells that differ.
pub fn diff_states(a: &NetState, b: &NetState) -> Result<(), String> {
    let mut diffs = Vec::new();
    if a.sigma != b.sigma {
        diffs.push(format!("swch: {:?} vs {:?}", a.sigma, b.sigma));
    }
    if a.gamma != b.gamma {
        diffs.push(format!("vars: {:?} vs {:?}", a.gamma, b.gamma));
    }
    if a.ir != b.ir {
        diffs.push(format!("rll: {} vs {}", a.ir, b.ir));
    }
    if a.hist != b.hist {
        diffs.push(format!("hist: {:?} vs {:?}", a.hist, b.hist));
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(diffs.join("\n"))
    }
}

/// Differential fuzz run. Disagreements are collected in the report; when
/// `repro_dir` is given each one is also written out as a program/topology
/// pair for replay.
pub fn run_fuzz(cfg: FuzzConfig, repro_dir: Option<&Path>) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = FuzzReport::default();
    for case in 0..cfg.count {
        let (net, topo_text, program) = gen_case(&mut rng, cfg.max_size);
        report.cases += 1;
        if let Err(detail) = compare_case(&program, &net, &VarStore::new(), cfg.budget) {
            let program_text = print_program(&program);
            if let Some(dir) = repro_dir {
                let _ = std::fs::write(dir.join(format!("case{case}.impnet")), &program_text);
                let _ = std::fs::write(dir.join(format!("case{case}.topo")), &topo_text);
            }
            report.disagreements.push(Disagreement {
                case,
                program: program_text,
                topology: topo_text,
                detail,
            });
        }
    }
    report
}

// Purely syntactic generation, for parser/printer round-trips. These
// programs are not meant to run; they exercise every grammar production.

const NAME_POOL: &[&str] = &["a", "b", "c", "x0", "x1", "x2", "y0", "y1", "z9", "w"];

fn rand_name(rng: &mut ChaCha8Rng) -> String {
    NAME_POOL.choose(rng).unwrap().to_string()
}

fn rand_expr(rng: &mut ChaCha8Rng, param: &str, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => Expr::Int(rng.gen_range(0..100)),
            1 => Expr::Wildcard,
            2 => Expr::Var(param.to_string()),
            _ => Expr::Var(rand_name(rng)),
        };
    }
    match rng.gen_range(0..12) {
        0 => Expr::Int(rng.gen_range(0..100)),
        1 => Expr::Var(param.to_string()),
        2 => {
            let n = rng.gen_range(2..4);
            Expr::Tuple((0..n).map(|_| rand_expr(rng, param, depth - 1)).collect())
        }
        3 => Expr::Fst(Box::new(rand_expr(rng, param, depth - 1))),
        4 => Expr::Snd(Box::new(rand_expr(rng, param, depth - 1))),
        5 => Expr::Port(Box::new(rand_expr(rng, param, depth - 1))),
        6 => Expr::Switch(Box::new(rand_expr(rng, param, depth - 1)), rand_name(rng)),
        7 => Expr::Prohibit(Box::new(rand_expr(rng, param, depth - 1)), rand_name(rng)),
        8 => {
            let h = [
                HeaderFn::SrcIp,
                HeaderFn::DstIp,
                HeaderFn::SrcPort,
                HeaderFn::DstPort,
                HeaderFn::InPort,
            ][rng.gen_range(0..5)];
            Expr::Header(h, Box::new(rand_expr(rng, param, depth - 1)))
        }
        9 => [Expr::SendAll, Expr::SendController][rng.gen_range(0..2)].clone(),
        10 => Expr::SendOut(Box::new(rand_expr(rng, param, depth - 1))),
        _ => {
            let op = [
                BinOp::Add,
                BinOp::Sub,
                BinOp::Mul,
                BinOp::Eq,
                BinOp::Ne,
                BinOp::Lt,
                BinOp::Le,
                BinOp::Gt,
                BinOp::Ge,
            ][rng.gen_range(0..9)];
            // comparisons are non-associative, so their operands must not
            // themselves be comparisons; additive operands are fine
            let operand = |rng: &mut ChaCha8Rng| loop {
                let e = rand_expr(rng, param, depth - 1);
                if !matches!(&e, Expr::Binop(o, _, _) if o.is_comparison()) {
                    return e;
                }
            };
            Expr::Binop(op, Box::new(operand(rng)), Box::new(operand(rng)))
        }
    }
}

fn rand_lambda(rng: &mut ChaCha8Rng) -> Lambda {
    let param = ["t", "u", "p"][rng.gen_range(0..3)].to_string();
    let body = rand_expr(rng, &param, 2);
    Lambda { param, body }
}

fn rand_action_set(rng: &mut ChaCha8Rng) -> ActionSet {
    ActionSet::from_values((0..rng.gen_range(0..3)).map(|_| {
        if rng.gen_bool(0.5) {
            Value::Int(rng.gen_range(0..9))
        } else {
            Value::Action(crate::domain::Action::SendAll)
        }
    }))
}

fn rand_et(rng: &mut ChaCha8Rng) -> EventTransformer {
    match rng.gen_range(0..11) {
        0 => EventTransformer::IntLit(rng.gen_range(0..100)),
        1 => EventTransformer::Lift(rand_name(rng), rand_lambda(rng)),
        2 => EventTransformer::ApplyLft(rand_name(rng), rand_lambda(rng)),
        3 => EventTransformer::ApplyRit(rand_name(rng), rand_lambda(rng)),
        4 => EventTransformer::Merge(rand_name(rng), rand_name(rng)),
        5 => EventTransformer::MixFst(rand_action_set(rng), rand_name(rng), rand_name(rng)),
        6 => EventTransformer::MixSnd(rand_name(rng), rand_action_set(rng), rand_name(rng)),
        7 => EventTransformer::Filter(rand_name(rng), rand_lambda(rng)),
        8 => EventTransformer::Once(rand_name(rng), rng.gen_range(1..9)),
        9 => EventTransformer::MakForwRule(rand_name(rng)),
        _ => EventTransformer::MakeRule(rand_name(rng)),
    }
}

fn rand_syntax_stmt(rng: &mut ChaCha8Rng, depth: u32) -> Stmt {
    let top = if depth == 0 { 4 } else { 6 };
    match rng.gen_range(0..top) {
        0 => Stmt::Assign(rand_name(rng), rand_et(rng)),
        1 => Stmt::AddRules(rand_name(rng)),
        2 => Stmt::Register,
        3 => Stmt::Send(rand_name(rng)),
        4 => Stmt::If(
            rand_name(rng),
            rand_syntax_stmts(rng, depth - 1, 2),
            rand_syntax_stmts(rng, depth - 1, 2),
        ),
        _ => Stmt::While(rand_name(rng), rand_syntax_stmts(rng, depth - 1, 2)),
    }
}

fn rand_syntax_stmts(rng: &mut ChaCha8Rng, depth: u32, max: u32) -> Vec<Stmt> {
    (0..rng.gen_range(1..=max))
        .map(|_| rand_syntax_stmt(rng, depth))
        .collect()
}

/// Random program covering the full grammar, for print/parse round-trips.
pub fn gen_syntax_program(rng: &mut ChaCha8Rng, max_size: u32) -> Program {
    let queries = [
        crate::netsim::Query::Switches,
        crate::netsim::Query::SourceIps,
        crate::netsim::Query::ProhibtedIps,
        crate::netsim::Query::Packets(crate::domain::Pattern::SrcPort(80)),
    ];
    let mut defs = Vec::new();
    let mut names: Vec<&str> = NAME_POOL.to_vec();
    for _ in 0..rng.gen_range(0..3) {
        let i = rng.gen_range(0..names.len());
        let name = names.remove(i);
        defs.push((
            name.to_string(),
            queries[rng.gen_range(0..queries.len())].clone(),
        ));
    }
    let body = rand_syntax_stmts(rng, 2, max_size.max(1));
    Program { defs, body }
}
