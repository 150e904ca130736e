//! End-to-end gate: one test per required behavior, each printing a single
//! PASS line when it holds. Expected values are frozen independently of the
//! evaluators (explicit literals or brute-force oracles).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use impnet::cli::parse_bind_file;
use impnet::domain::{
    Action, ActionSet, Binding, Event, Ip, NetState, Packet, Pattern, Rule, RuleEntry, RuleList,
    SwitchId, Value, VarStore,
};
use impnet::dynamic_sem::{
    cool_step, is_final, run_to_final, start_configuration, StepKind,
};
use impnet::fuzz::{run_fuzz, FuzzConfig};
use impnet::netsim::{parse_topology, Network};
use impnet::static_sem::{eval_et, run_program, RunConfig};
use impnet::syntax::{desugar_program, parse_program, parse_stmt, EventTransformer, Program, Stmt};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

fn load(stem: &str, with_bind: bool) -> (Program, Network, VarStore) {
    let text = std::fs::read_to_string(fixture(&format!("{stem}.impnet"))).unwrap();
    let program = parse_program(&text).unwrap();
    let topo = std::fs::read_to_string(fixture(&format!("{stem}.topo"))).unwrap();
    let net = parse_topology(&topo).unwrap();
    let initial = if with_bind {
        let bind = std::fs::read_to_string(fixture(&format!("{stem}.bind"))).unwrap();
        parse_bind_file(&bind).unwrap()
    } else {
        VarStore::new()
    };
    (program, net, initial)
}

fn run_both(program: &Program, net: &Network, initial: &VarStore) -> (NetState, NetState) {
    let (st, _) = run_program(program, net, initial.clone(), RunConfig::default()).unwrap();
    let (dy, _) = impnet::dynamic_sem::run_dynamic(
        desugar_program(program),
        net,
        initial.clone(),
        1_000_000,
    )
    .unwrap();
    (st, dy)
}

fn sw(id: &str) -> SwitchId {
    SwitchId::new(id)
}

fn rule(pattern: Pattern, action: Action) -> Rule {
    Rule {
        pattern,
        actions: vec![action],
    }
}

#[test]
fn golden_run_rule_construction_program() {
    let (program, net, initial) = load("program1", true);
    let (st, dy) = run_both(&program, &net, &initial);

    // frozen expectation: both switches end with the same two rules, in
    // event order
    let r_web = rule(Pattern::SrcPort(80), Action::SendAll);
    let r_in = rule(Pattern::InPort(1), Action::SendController);
    let mut expected_sigma = BTreeMap::new();
    expected_sigma.insert(sw("id1"), vec![r_web.clone(), r_in.clone()]);
    expected_sigma.insert(sw("id2"), vec![r_web.clone(), r_in.clone()]);
    assert_eq!(st.sigma.0, expected_sigma);
    assert!(st.ir.is_empty());

    let expected_rules = RuleList(vec![
        RuleEntry::Plain(r_web.clone()),
        RuleEntry::Plain(r_in.clone()),
    ]);
    assert_eq!(
        st.gamma.get("y").unwrap(),
        &Binding::Rules(expected_rules.clone())
    );
    assert_eq!(
        st.gamma.get("z").unwrap(),
        &Binding::Event(Event::new(vec![
            Value::Tuple(vec![
                Value::Switch(sw("id1")),
                Value::RuleList(expected_rules.clone())
            ]),
            Value::Tuple(vec![
                Value::Switch(sw("id2")),
                Value::RuleList(expected_rules)
            ]),
        ]))
    );
    assert_eq!(st, dy);
    println!("PASS: rule-construction program reaches the expected final state");
}

fn pk(srcip: &str, srcport: i64, inport: i64) -> Packet {
    Packet {
        srcip: Ip::new(srcip),
        dstip: Ip::new("9.9.9.9"),
        srcport,
        dstport: 99,
        inport,
        tag: String::new(),
    }
}

#[test]
fn golden_run_forwarding_program_with_intermediate_stores() {
    let (program, net, initial) = load("program2", true);
    let (st, trace) = run_program(&program, &net, initial.clone(), RunConfig::default()).unwrap();

    let pk1 = pk("10.0.0.1", 80, 2);
    let pk2 = pk("10.0.0.2", 22, 3);
    let r1 = rule(Pattern::Exact(pk1.clone()), Action::SendOut(2));
    let r2 = rule(Pattern::Exact(pk2.clone()), Action::SendOut(3));

    // frozen expectation for the variable store after each of the six
    // execution steps
    let y_after: Vec<Binding> = vec![
        Binding::Event(Event::new(vec![
            Value::Tuple(vec![Value::Ip(Ip::new("10.0.0.1")), Value::Packet(pk1.clone())]),
            Value::Tuple(vec![Value::Ip(Ip::new("10.0.0.2")), Value::Packet(pk2.clone())]),
        ])),
        Binding::Event(Event::new(vec![
            Value::Tuple(vec![Value::Port(2), Value::Packet(pk1.clone())]),
            Value::Tuple(vec![Value::Port(3), Value::Packet(pk2.clone())]),
        ])),
        Binding::Event(Event::new(vec![
            Value::Tuple(vec![
                Value::Switch(sw("id1")),
                Value::Port(2),
                Value::Packet(pk1.clone()),
            ]),
            Value::Tuple(vec![
                Value::Switch(sw("id2")),
                Value::Port(3),
                Value::Packet(pk2.clone()),
            ]),
        ])),
        Binding::Rules(RuleList(vec![
            RuleEntry::ForSwitch(sw("id1"), r1.clone()),
            RuleEntry::ForSwitch(sw("id2"), r2.clone()),
        ])),
    ];

    assert_eq!(trace.0.len(), 6, "one recorded step per executed statement");
    for (i, expected) in y_after.iter().enumerate() {
        assert_eq!(
            trace.0[i].state.gamma.get("y").unwrap(),
            expected,
            "store after step {i}"
        );
    }
    // staging step: store unchanged, both rules staged
    assert_eq!(trace.0[4].state.gamma, trace.0[3].state.gamma);
    let staged: Vec<_> = trace.0[4].state.ir.iter().cloned().collect();
    assert_eq!(staged, vec![(sw("id1"), r1.clone()), (sw("id2"), r2.clone())]);
    // commit step
    assert!(trace.0[5].state.ir.is_empty());

    let mut expected_sigma = BTreeMap::new();
    expected_sigma.insert(sw("id1"), vec![r1]);
    expected_sigma.insert(sw("id2"), vec![r2]);
    assert_eq!(st.sigma.0, expected_sigma);

    let (_, dy) = run_both(&program, &net, &initial);
    assert_eq!(st, dy);
    println!("PASS: forwarding program matches the expected per-step stores and final state");
}

#[test]
fn firewall_program_matches_independent_oracle() {
    let (program, net, initial) = load("program3", false);
    let (st, dy) = run_both(&program, &net, &initial);

    // independent oracle: fold directly over the topology. For every
    // switch (in sorted id order), every prohibited IP whose first pending
    // arrival is at that switch contributes one drop rule, in prohibition
    // order.
    let mut oracle: BTreeMap<SwitchId, Vec<Rule>> = BTreeMap::new();
    let mut switch_ids: Vec<SwitchId> = net.switches.iter().map(|(id, _)| id.clone()).collect();
    switch_ids.sort();
    for id in &switch_ids {
        for ip in &net.prohibited_ips {
            let arrival = net
                .pending
                .iter()
                .find(|(_, p)| &p.srcip == ip)
                .map(|(s, _)| s.clone())
                .expect("every prohibited IP has a pending arrival");
            if &arrival == id {
                oracle
                    .entry(id.clone())
                    .or_default()
                    .push(rule(Pattern::SrcIp(ip.clone()), Action::Prohibit));
            }
        }
    }
    assert!(!oracle.is_empty());
    assert_eq!(st.sigma.0, oracle);
    assert!(st.ir.is_empty());
    assert_eq!(st, dy);
    println!("PASS: firewall program agrees with the topology-fold oracle");
}

#[test]
fn fuzzed_programs_agree_under_both_evaluators() {
    let start = Instant::now();
    let report = run_fuzz(
        FuzzConfig {
            seed: 1,
            count: 1000,
            max_size: 20,
            budget: 1_000_000,
        },
        None,
    );
    let elapsed = start.elapsed();
    assert_eq!(report.cases, 1000);
    assert!(
        report.disagreements.is_empty(),
        "first disagreement:\n{}\n{}",
        report.disagreements[0].program,
        report.disagreements[0].detail
    );
    assert!(
        elapsed.as_secs() < 60,
        "1000 cases took {elapsed:?}, expected under 60s"
    );
    println!("PASS: 1000 fuzzed programs agree under both evaluators in {elapsed:?}");
}

fn et(text: &str) -> EventTransformer {
    match parse_stmt(&format!("q := {text};")).unwrap() {
        Stmt::Assign(_, et) => et,
        _ => unreachable!(),
    }
}

fn int_event(rng: &mut ChaCha8Rng, len: usize) -> Event {
    Event::new((0..len).map(|_| Value::Int(rng.gen_range(-5..6))).collect())
}

fn state_with(pairs: Vec<(&str, Binding)>) -> NetState {
    let mut gamma = VarStore::new();
    for (x, b) in pairs {
        gamma.bind(x, b);
    }
    NetState::with_gamma(gamma)
}

fn as_event(b: &Binding) -> &Event {
    match b {
        Binding::Event(ev) => ev,
        Binding::Rules(_) => panic!("expected an event"),
    }
}

fn is_subsequence(sub: &[Value], full: &[Value]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|v| it.any(|w| w == v))
}

#[test]
fn transformer_properties_hold_on_randomized_events() {
    let net = Network::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let start = Instant::now();
    for _ in 0..10_000 {
        let len = rng.gen_range(0..8);
        let ev_a = int_event(&mut rng, len);
        let ev_b = int_event(&mut rng, len);
        let state = state_with(vec![
            ("a", Binding::Event(ev_a.clone())),
            ("b", Binding::Event(ev_b.clone())),
            (
                "s",
                Binding::Event(Event::new(vec![Value::Int(rng.gen_range(0..9))])),
            ),
        ]);

        // mapping transformers preserve length
        let lifted = eval_et(&et("Lift(a, \\t.t + 1)"), &state, &net).unwrap();
        assert_eq!(as_event(&lifted).len(), len);
        let merged = eval_et(&et("Merge(a, b)"), &state, &net).unwrap();
        assert_eq!(as_event(&merged).len(), len);

        // filtering yields a subsequence of the input
        let filtered = eval_et(&et("Filter(a, \\t.t > 0)"), &state, &net).unwrap();
        assert!(is_subsequence(&as_event(&filtered).0, &ev_a.0));

        // the accumulated set at position i equals a from-scratch dedup
        // fold of the seed and the first i+1 items
        let mixed = eval_et(&et("MixFst({7}, a, b)"), &state, &net).unwrap();
        let mixed = as_event(&mixed);
        assert_eq!(mixed.len(), len);
        for (i, item) in mixed.iter().enumerate() {
            let Value::Tuple(parts) = item else { panic!() };
            let mut brute: Vec<Value> = vec![Value::Int(7)];
            for v in ev_a.0.iter().take(i + 1) {
                if !brute.contains(v) {
                    brute.push(v.clone());
                }
            }
            assert_eq!(parts[0], Value::ActionSet(ActionSet::from_values(brute)));
            assert_eq!(parts[1], ev_b.0[i]);
        }

        // replication copies the single item exactly n times
        let n = rng.gen_range(1..6u32);
        let once = eval_et(&et(&format!("Once(s, {n})")), &state, &net).unwrap();
        let single = as_event(state.gamma.get("s").unwrap()).0[0].clone();
        assert_eq!(as_event(&once).0, vec![single; n as usize]);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 30,
        "10000 randomized checks took {elapsed:?}, expected under 30s"
    );
    println!("PASS: transformer properties hold on 10000 randomized events in {elapsed:?}");
}

#[test]
fn rewriting_equations_are_reversible_and_state_preserving() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut equations = 0usize;
    for _ in 0..100 {
        let (net, _, program) = impnet::fuzz::gen_case(&mut rng, 10);
        let chain = desugar_program(&program);
        let conf = start_configuration(chain, VarStore::new());
        let (final_conf, steps) = run_to_final(conf, &net, 1_000_000).unwrap();
        assert!(is_final(&final_conf));
        for step in &steps {
            if step.kind != StepKind::Equation {
                continue;
            }
            equations += 1;
            // structural equations touch only the computation cell
            assert_eq!(step.before.swch, step.after.swch, "{}", step.name);
            assert_eq!(step.before.vars, step.after.vars, "{}", step.name);
            assert_eq!(step.before.rll, step.after.rll, "{}", step.name);
            assert_eq!(step.before.hist, step.after.hist, "{}", step.name);
            // every heating step is undone by one cooling step
            if step.name.starts_with("heat") {
                let (undone, _) = cool_step(&step.after).expect("heated term must cool");
                assert_eq!(undone, step.before, "{}", step.name);
            }
        }
    }
    assert!(equations > 0);
    println!("PASS: {equations} structural equation steps are reversible and state-preserving");
}

#[test]
fn statement_rules_perform_their_exact_transformations() {
    let net = parse_topology(
        "switch id1 ports 4\nswitch id2 ports 4\nlink id1:1 id2:1\n",
    )
    .unwrap();
    let run = |stmts: &str, initial: VarStore| -> NetState {
        let text = format!(">>\n{stmts}\n");
        let program = parse_program(&text).unwrap();
        let (st, _) = run_program(&program, &net, initial.clone(), RunConfig::default()).unwrap();
        let (dy, _) = impnet::dynamic_sem::run_dynamic(
            desugar_program(&program),
            &net,
            initial,
            1_000_000,
        )
        .unwrap();
        assert_eq!(st, dy, "evaluators must agree on: {stmts}");
        st
    };

    // assignment: binds exactly the evaluated transformer, nothing else
    let st = run("x := 5;", VarStore::new());
    assert_eq!(
        st.gamma.get("x").unwrap(),
        &Binding::Event(Event::new(vec![Value::Int(5)]))
    );
    assert!(st.sigma.0.is_empty() && st.ir.is_empty() && st.hist.0.is_empty());

    // sequencing: later statements see and override earlier effects
    let st = run("x := 1;\nx := 2;\ny := Once(x, 2);", VarStore::new());
    assert_eq!(
        st.gamma.get("y").unwrap(),
        &Binding::Event(Event::new(vec![Value::Int(2), Value::Int(2)]))
    );

    // staging: AddRules fills the reservoir without touching the tables
    let r = rule(Pattern::DstPort(53), Action::SendController);
    let mut gamma = VarStore::new();
    gamma.bind(
        "w",
        Binding::Event(Event::new(vec![Value::Tuple(vec![
            Value::Switch(sw("id2")),
            Value::Rule(r.clone()),
        ])])),
    );
    let st = run("AddRules(w);", gamma.clone());
    assert_eq!(
        st.ir.iter().cloned().collect::<Vec<_>>(),
        vec![(sw("id2"), r.clone())]
    );
    assert!(st.sigma.0.is_empty());

    // committing: Register moves the reservoir into the tables and
    // empties it
    let st = run("AddRules(w);\nRegister;", gamma);
    assert!(st.ir.is_empty());
    assert_eq!(st.sigma.rules(&sw("id2")), &[r]);

    // sending: the action is applied and the treatment is recorded
    let packet = pk("10.0.0.9", 80, 1);
    let mut gamma = VarStore::new();
    gamma.bind(
        "m",
        Binding::Event(Event::new(vec![Value::Tuple(vec![
            Value::Switch(sw("id1")),
            Value::Packet(packet.clone()),
            Value::Action(Action::SendOut(1)),
        ])])),
    );
    let st = run("Send(m);", gamma);
    assert_eq!(
        st.hist.entries(&sw("id1")),
        &[(packet, Action::SendOut(1))]
    );
    println!("PASS: each statement rule performs its exact state transformation");
}
