//! Runtime value universe: values, events, patterns, actions, rules, flow
//! tables, variable stores and the controller state the evaluators thread
//! through a run.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Identifier of a physical switch.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SwitchId(pub String);

impl SwitchId {
    pub fn new(s: impl Into<String>) -> Self {
        SwitchId(s.into())
    }
}

impl fmt::Display for SwitchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An IP address, kept opaque: any dotted-quad style label works.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ip(pub String);

impl Ip {
    pub fn new(s: impl Into<String>) -> Self {
        Ip(s.into())
    }
}

impl fmt::Display for Ip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A packet header record. Packets are compared field-for-field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Packet {
    pub srcip: Ip,
    pub dstip: Ip,
    pub srcport: i64,
    pub dstport: i64,
    pub inport: i64,
    pub tag: String,
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pkt[srcip={} dstip={} srcport={} dstport={} inport={}",
            self.srcip, self.dstip, self.srcport, self.dstport, self.inport
        )?;
        if !self.tag.is_empty() {
            write!(f, " tag={}", self.tag)?;
        }
        write!(f, "]")
    }
}

/// What a switch does to a matched packet.
///
/// `Prohibit` (drop) is the action firewall rules install; the remaining
/// variants are the classic controller/flood/port-out/header-rewrite set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    SendController,
    SendAll,
    SendOut(i64),
    Change(String, Box<Value>),
    Prohibit,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SendController => write!(f, "sendcontroller"),
            Action::SendAll => write!(f, "sendall"),
            Action::SendOut(p) => write!(f, "sendout({p})"),
            Action::Change(h, v) => write!(f, "change({h}, {v})"),
            Action::Prohibit => write!(f, "prohibit"),
        }
    }
}

/// A predicate over packet headers denoting a set of packets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    InPort(i64),
    SrcPort(i64),
    DstPort(i64),
    SrcIp(Ip),
    DstIp(Ip),
    /// Matches exactly one packet, header-for-header. Forwarding rules built
    /// from observed packets use this form.
    Exact(Packet),
    MatchAll,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::InPort(n) => write!(f, "inport({n})"),
            Pattern::SrcPort(n) => write!(f, "srcport({n})"),
            Pattern::DstPort(n) => write!(f, "dstport({n})"),
            Pattern::SrcIp(a) => write!(f, "srcip({a})"),
            Pattern::DstIp(a) => write!(f, "dstip({a})"),
            Pattern::Exact(pk) => write!(f, "{pk}"),
            Pattern::MatchAll => write!(f, "matchall"),
        }
    }
}

/// True iff the packet's corresponding header field equals the pattern's
/// constant. `MatchAll` matches everything.
pub fn pattern_matches(p: &Pattern, pk: &Packet) -> bool {
    match p {
        Pattern::InPort(n) => pk.inport == *n,
        Pattern::SrcPort(n) => pk.srcport == *n,
        Pattern::DstPort(n) => pk.dstport == *n,
        Pattern::SrcIp(a) => pk.srcip == *a,
        Pattern::DstIp(a) => pk.dstip == *a,
        Pattern::Exact(q) => pk == q,
        Pattern::MatchAll => true,
    }
}

/// An installable rule: a pattern plus a non-empty action sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rule {
    pub pattern: Pattern,
    pub actions: Vec<Action>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, [", self.pattern)?;
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "])")
    }
}

/// One entry of a rule list. `MakeRule` produces plain rules; `MakForwRule`
/// tags each rule with the switch it is destined for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleEntry {
    Plain(Rule),
    ForSwitch(SwitchId, Rule),
}

impl fmt::Display for RuleEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleEntry::Plain(r) => write!(f, "{r}"),
            RuleEntry::ForSwitch(sw, r) => write!(f, "({sw}, {r})"),
        }
    }
}

/// An ordered list of rules as produced by the rule-making transformers.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct RuleList(pub Vec<RuleEntry>);

impl RuleList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RuleList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// A set of values with insertion-ordered iteration and idempotent insert.
/// `MixFst`/`MixSnd` fold event items into this.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionSet(Vec<Value>);

impl ActionSet {
    pub fn new() -> Self {
        ActionSet(Vec::new())
    }

    pub fn from_values(vs: impl IntoIterator<Item = Value>) -> Self {
        let mut s = ActionSet::new();
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: Value) {
        if !self.0.contains(&v) {
            self.0.push(v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// The closed union of runtime values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Switch(SwitchId),
    Port(i64),
    Ip(Ip),
    Packet(Packet),
    Pattern(Pattern),
    Action(Action),
    ActionSet(ActionSet),
    Rule(Rule),
    RuleList(RuleList),
    Tuple(Vec<Value>),
    Wildcard,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Switch(id) => write!(f, "{id}"),
            Value::Port(n) => write!(f, "port({n})"),
            Value::Ip(a) => write!(f, "{a}"),
            Value::Packet(pk) => write!(f, "{pk}"),
            Value::Pattern(p) => write!(f, "{p}"),
            Value::Action(a) => write!(f, "{a}"),
            Value::ActionSet(s) => write!(f, "{s}"),
            Value::Rule(r) => write!(f, "{r}"),
            Value::RuleList(rl) => write!(f, "{rl}"),
            Value::Tuple(vs) => {
                write!(f, "(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Value::Wildcard => write!(f, "_"),
        }
    }
}

/// The type of a value. `Pair` is the only recursive constructor; wider
/// tuples and the rule/pattern/action values carry extension tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Int,
    Switch,
    Port,
    Ip,
    Packet,
    Pattern,
    Action,
    ActionSet,
    Rule,
    RuleList,
    Wildcard,
    /// The (Switch IDs, int, bool) triple type; booleans are 0/1 integers.
    SwitchIntBool,
    Pair(Box<Type>, Box<Type>),
    Tuple(Vec<Type>),
}

/// Total: every value has exactly one type.
pub fn type_of(v: &Value) -> Type {
    match v {
        Value::Int(_) => Type::Int,
        Value::Switch(_) => Type::Switch,
        Value::Port(_) => Type::Port,
        Value::Ip(_) => Type::Ip,
        Value::Packet(_) => Type::Packet,
        Value::Pattern(_) => Type::Pattern,
        Value::Action(_) => Type::Action,
        Value::ActionSet(_) => Type::ActionSet,
        Value::Rule(_) => Type::Rule,
        Value::RuleList(_) => Type::RuleList,
        Value::Wildcard => Type::Wildcard,
        Value::Tuple(vs) => {
            let ts: Vec<Type> = vs.iter().map(type_of).collect();
            match ts.as_slice() {
                [a, b] => Type::Pair(Box::new(a.clone()), Box::new(b.clone())),
                [Type::Switch, Type::Int, Type::Int] => Type::SwitchIntBool,
                _ => Type::Tuple(ts),
            }
        }
    }
}

/// A finite ordered sequence of same-shaped values.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Event(pub Vec<Value>);

impl Event {
    pub fn new(items: Vec<Value>) -> Self {
        Event(items)
    }

    pub fn empty() -> Self {
        Event(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }

    /// All items share one type (vacuously true when empty).
    pub fn is_homogeneous(&self) -> bool {
        match self.0.split_first() {
            None => true,
            Some((first, rest)) => {
                let t = type_of(first);
                rest.iter().all(|v| type_of(v) == t)
            }
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// What a program variable may hold: an event or a rule list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Event(Event),
    Rules(RuleList),
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Event(e) => write!(f, "{e}"),
            Binding::Rules(rl) => write!(f, "{rl}"),
        }
    }
}

/// Branch condition discipline shared by both semantics: a singleton integer
/// event tests nonzero, any other binding tests non-emptiness.
pub fn truthy(b: &Binding) -> bool {
    match b {
        Binding::Event(ev) => match ev.0.as_slice() {
            [Value::Int(n)] => *n != 0,
            items => !items.is_empty(),
        },
        Binding::Rules(rl) => !rl.is_empty(),
    }
}

/// View a binding as an event: rule lists become events of rule values,
/// switch-tagged entries become (switch, rule) pairs.
pub fn binding_as_event(b: &Binding) -> Event {
    match b {
        Binding::Event(ev) => ev.clone(),
        Binding::Rules(rl) => Event(
            rl.0.iter()
                .map(|e| match e {
                    RuleEntry::Plain(r) => Value::Rule(r.clone()),
                    RuleEntry::ForSwitch(sw, r) => {
                        Value::Tuple(vec![Value::Switch(sw.clone()), Value::Rule(r.clone())])
                    }
                })
                .collect(),
        ),
    }
}

/// The variable store.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarStore(pub BTreeMap<String, Binding>);

impl VarStore {
    pub fn new() -> Self {
        VarStore(BTreeMap::new())
    }

    pub fn get(&self, x: &str) -> Result<&Binding, EvalError> {
        self.0
            .get(x)
            .ok_or_else(|| EvalError::UnboundVariable(x.to_string()))
    }

    pub fn event(&self, x: &str) -> Result<&Event, EvalError> {
        match self.get(x)? {
            Binding::Event(ev) => Ok(ev),
            Binding::Rules(_) => Err(EvalError::NotAnEvent(x.to_string())),
        }
    }

    pub fn bind(&mut self, x: impl Into<String>, b: Binding) {
        self.0.insert(x.into(), b);
    }
}

/// Flow tables: per-switch ordered rule lists; lookup of an unknown switch
/// yields the empty sequence and rule order is first-match significant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowTables(pub BTreeMap<SwitchId, Vec<Rule>>);

impl FlowTables {
    pub fn new() -> Self {
        FlowTables(BTreeMap::new())
    }

    pub fn rules(&self, sw: &SwitchId) -> &[Rule] {
        self.0.get(sw).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// The reservoir of (switch, rule) assignments staged by `AddRules` but not
/// yet committed. Set semantics: duplicate insertion is idempotent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InitialRules(Vec<(SwitchId, Rule)>);

impl InitialRules {
    pub fn new() -> Self {
        InitialRules(Vec::new())
    }

    pub fn insert(&mut self, sw: SwitchId, r: Rule) {
        if !self.0.contains(&(sw.clone(), r.clone())) {
            self.0.push((sw, r));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SwitchId, Rule)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for InitialRules {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (sw, r)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({sw}, {r})")?;
        }
        write!(f, "}}")
    }
}

/// Per-switch append-only log of (packet, action) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History(pub BTreeMap<SwitchId, Vec<(Packet, Action)>>);

impl History {
    pub fn new() -> Self {
        History(BTreeMap::new())
    }

    pub fn record(&mut self, sw: SwitchId, pk: Packet, a: Action) {
        self.0.entry(sw).or_default().push((pk, a));
    }

    pub fn entries(&self, sw: &SwitchId) -> &[(Packet, Action)] {
        self.0.get(sw).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// The controller state the static semantics threads through a run: flow
/// tables, variable store, staged rules and the packet-treatment history.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetState {
    pub sigma: FlowTables,
    pub gamma: VarStore,
    pub ir: InitialRules,
    pub hist: History,
}

impl NetState {
    pub fn new() -> Self {
        NetState::default()
    }

    pub fn with_gamma(gamma: VarStore) -> Self {
        NetState {
            gamma,
            ..NetState::default()
        }
    }
}

/// Commit the staged rules into the flow tables. Entries are appended in a
/// deterministic order: sorted by switch id, then insertion order.
pub fn merge_flow_tables(sigma: &FlowTables, ir: &InitialRules) -> FlowTables {
    let mut out = sigma.clone();
    let mut ids: Vec<&SwitchId> = ir.iter().map(|(sw, _)| sw).collect();
    ids.sort();
    ids.dedup();
    for id in ids {
        for (sw, r) in ir.iter() {
            if sw == id {
                out.0.entry(sw.clone()).or_default().push(r.clone());
            }
        }
    }
    out
}

/// Flatten whatever `AddRules` accepts into (switch, rule) assignments:
/// an event of (switch, rule) or (switch, rule-list) pairs, or a
/// switch-tagged rule list as produced by `MakForwRule`.
pub fn rule_assignments(b: &Binding) -> Result<Vec<(SwitchId, Rule)>, EvalError> {
    let mut out = Vec::new();
    match b {
        Binding::Rules(rl) => {
            for entry in &rl.0 {
                match entry {
                    RuleEntry::ForSwitch(sw, r) => out.push((sw.clone(), r.clone())),
                    RuleEntry::Plain(_) => {
                        return Err(EvalError::BadShape(
                            "AddRules on a rule list with no switch assignment".into(),
                        ))
                    }
                }
            }
        }
        Binding::Event(ev) => {
            for item in ev.iter() {
                match item {
                    Value::Tuple(vs) => match vs.as_slice() {
                        [Value::Switch(sw), Value::Rule(r)] => out.push((sw.clone(), r.clone())),
                        [Value::Switch(sw), Value::RuleList(rl)] => {
                            for entry in &rl.0 {
                                let r = match entry {
                                    RuleEntry::Plain(r) => r,
                                    RuleEntry::ForSwitch(_, r) => r,
                                };
                                out.push((sw.clone(), r.clone()));
                            }
                        }
                        _ => {
                            return Err(EvalError::BadShape(format!(
                                "AddRules expects (switch, rule) pairs, got {item}"
                            )))
                        }
                    },
                    _ => {
                        return Err(EvalError::BadShape(format!(
                            "AddRules expects (switch, rule) pairs, got {item}"
                        )))
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Evaluation failures shared by both semantics.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{0}` holds a rule list where an event is required")]
    NotAnEvent(String),
    #[error("event length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("lambda stuck: {0}")]
    StuckLambda(String),
    #[error("filter lambda returned a non-boolean result: {0}")]
    NonBoolean(String),
    #[error("ill-shaped event item: {0}")]
    BadShape(String),
    #[error("Once replication count must be at least 1, got {0}")]
    OnceCount(i64),
    #[error("unknown switch `{0}`")]
    UnknownSwitch(SwitchId),
    #[error("step budget exceeded after {0} steps")]
    BudgetExceeded(u64),
    #[error("stuck configuration at head term: {0}")]
    Stuck(String),
    #[error("duplicate definition of `{0}`")]
    DuplicateDef(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pk(srcip: &str, inport: i64) -> Packet {
        Packet {
            srcip: Ip::new(srcip),
            dstip: Ip::new("9.9.9.9"),
            srcport: 80,
            dstport: 99,
            inport,
            tag: String::new(),
        }
    }

    #[test]
    fn type_of_basics() {
        assert_eq!(type_of(&Value::Int(80)), Type::Int);
        let pair = Value::Tuple(vec![Value::Switch(SwitchId::new("id1")), Value::Int(2)]);
        assert_eq!(
            type_of(&pair),
            Type::Pair(Box::new(Type::Switch), Box::new(Type::Int))
        );
        // (Switch IDs, int, bool) triple; the bool is a 0/1 integer.
        let triple = Value::Tuple(vec![
            Value::Switch(SwitchId::new("id1")),
            Value::Int(2),
            Value::Int(1),
        ]);
        assert_eq!(type_of(&triple), Type::SwitchIntBool);
    }

    #[test]
    fn pattern_matching() {
        assert!(pattern_matches(&Pattern::SrcPort(80), &pk("1.1.1.1", 1)));
        assert!(!pattern_matches(&Pattern::InPort(1), &pk("1.1.1.1", 2)));
        assert!(pattern_matches(&Pattern::MatchAll, &pk("1.1.1.1", 7)));
    }

    #[test]
    fn merge_appends_in_sorted_switch_order() {
        let r = Rule {
            pattern: Pattern::SrcPort(80),
            actions: vec![Action::SendAll],
        };
        let mut ir = InitialRules::new();
        ir.insert(SwitchId::new("id2"), r.clone());
        ir.insert(SwitchId::new("id1"), r.clone());
        let sigma = merge_flow_tables(&FlowTables::new(), &ir);
        assert_eq!(sigma.rules(&SwitchId::new("id1")), &[r.clone()]);
        assert_eq!(sigma.rules(&SwitchId::new("id2")), &[r.clone()]);
        // identity on the empty reservoir
        let again = merge_flow_tables(&sigma, &InitialRules::new());
        assert_eq!(again, sigma);
    }

    #[test]
    fn merge_against_dedup_fold_oracle() {
        // duplicate (id, r) inserted twice behaves as a fold over the
        // deduplicated pair set
        let r = Rule {
            pattern: Pattern::InPort(1),
            actions: vec![Action::SendController],
        };
        let mut ir = InitialRules::new();
        ir.insert(SwitchId::new("id1"), r.clone());
        ir.insert(SwitchId::new("id1"), r.clone());
        let sigma = merge_flow_tables(&FlowTables::new(), &ir);

        let mut oracle = FlowTables::new();
        let mut seen = Vec::new();
        for pair in [(SwitchId::new("id1"), r.clone()), (SwitchId::new("id1"), r)] {
            if !seen.contains(&pair) {
                seen.push(pair.clone());
                oracle.0.entry(pair.0).or_default().push(pair.1);
            }
        }
        assert_eq!(sigma, oracle);
    }

    #[test]
    fn event_homogeneity() {
        let ev = Event::new(vec![Value::Int(1), Value::Int(2)]);
        assert!(ev.is_homogeneous());
        let mixed = Event::new(vec![Value::Int(1), Value::Wildcard]);
        assert!(!mixed.is_homogeneous());
        assert!(Event::empty().is_homogeneous());
    }

    #[test]
    fn history_preserves_append_order() {
        let mut h = History::new();
        let id = SwitchId::new("id1");
        h.record(id.clone(), pk("1.1.1.1", 1), Action::SendAll);
        h.record(id.clone(), pk("2.2.2.2", 2), Action::SendController);
        let got = h.entries(&id);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].1, Action::SendAll);
        assert_eq!(got[1].1, Action::SendController);
    }

    #[test]
    fn truthiness() {
        assert!(!truthy(&Binding::Event(Event::new(vec![Value::Int(0)]))));
        assert!(truthy(&Binding::Event(Event::new(vec![Value::Int(2)]))));
        assert!(!truthy(&Binding::Event(Event::empty())));
        assert!(truthy(&Binding::Event(Event::new(vec![
            Value::Wildcard,
            Value::Wildcard
        ]))));
    }
}
