//! The simulated network the controller program acts on: topology, pending
//! packet arrivals, first-match flow-table processing and the fixed query set
//! that seeds program variables.

use std::fmt;

use thiserror::Error;

use crate::domain::{
    pattern_matches, Action, Event, EvalError, FlowTables, History, Ip, Packet, Pattern, SwitchId,
    Value,
};

/// What a switch does with a packet no rule matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissAction {
    #[default]
    Controller,
    Drop,
}

/// A bidirectional link between two switch ports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub a: (SwitchId, i64),
    pub b: (SwitchId, i64),
}

/// The simulated topology plus its pending packet arrivals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Network {
    pub switches: Vec<(SwitchId, i64)>,
    pub links: Vec<Link>,
    pub pending: Vec<(SwitchId, Packet)>,
    pub prohibited_ips: Vec<Ip>,
    pub miss_action: MissAction,
}

impl Network {
    pub fn has_switch(&self, sw: &SwitchId) -> bool {
        self.switches.iter().any(|(id, _)| id == sw)
    }

    pub fn switch_ids(&self) -> impl Iterator<Item = &SwitchId> {
        self.switches.iter().map(|(id, _)| id)
    }

    /// The far end of the link attached to `(sw, port)`, if any.
    pub fn peer(&self, sw: &SwitchId, port: i64) -> Option<(SwitchId, i64)> {
        for l in &self.links {
            if l.a == (sw.clone(), port) {
                return Some(l.b.clone());
            }
            if l.b == (sw.clone(), port) {
                return Some(l.a.clone());
            }
        }
        None
    }

    /// The pending arrival carrying `pk`, if any.
    pub fn arrival_of(&self, pk: &Packet) -> Option<&SwitchId> {
        self.pending.iter().find(|(_, p)| p == pk).map(|(sw, _)| sw)
    }

    /// The first pending arrival whose packet has source IP `ip`.
    pub fn arrival_from(&self, ip: &Ip) -> Option<&(SwitchId, Packet)> {
        self.pending.iter().find(|(_, p)| &p.srcip == ip)
    }

    /// Structural sanity: links reference declared switches and in-range
    /// ports, pending packets reference declared switches.
    pub fn validate(&self) -> Result<(), TopoError> {
        let port_count = |sw: &SwitchId| {
            self.switches
                .iter()
                .find(|(id, _)| id == sw)
                .map(|(_, n)| *n)
        };
        for l in &self.links {
            for (sw, port) in [&l.a, &l.b] {
                match port_count(sw) {
                    None => return Err(TopoError::UnknownSwitch(sw.clone())),
                    Some(n) if *port < 1 || *port > n => {
                        return Err(TopoError::PortOutOfRange {
                            switch: sw.clone(),
                            port: *port,
                            ports: n,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for (sw, _) in &self.pending {
            if !self.has_switch(sw) {
                return Err(TopoError::UnknownSwitch(sw.clone()));
            }
        }
        Ok(())
    }
}

/// The fixed query set seeding program variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Switches,
    SourceIps,
    ProhibtedIps,
    Packets(Pattern),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Switches => write!(f, "Switches"),
            Query::SourceIps => write!(f, "SourceIps"),
            Query::ProhibtedIps => write!(f, "ProhibtedIps"),
            Query::Packets(p) => write!(f, "Packets({p})"),
        }
    }
}

/// Read-only evaluation of a query over the network.
pub fn run_query(q: &Query, net: &Network) -> Event {
    match q {
        Query::Switches => Event::new(
            net.switch_ids()
                .map(|id| Value::Switch(id.clone()))
                .collect(),
        ),
        Query::SourceIps => Event::new(
            net.pending
                .iter()
                .map(|(_, pk)| {
                    Value::Tuple(vec![Value::Ip(pk.srcip.clone()), Value::Packet(pk.clone())])
                })
                .collect(),
        ),
        Query::ProhibtedIps => Event::new(
            net.prohibited_ips
                .iter()
                .map(|ip| Value::Ip(ip.clone()))
                .collect(),
        ),
        Query::Packets(p) => Event::new(
            net.pending
                .iter()
                .filter(|(_, pk)| pattern_matches(p, pk))
                .map(|(_, pk)| Value::Packet(pk.clone()))
                .collect(),
        ),
    }
}

/// What happened when a packet was processed or an action applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Actions applied, in order.
    pub actions: Vec<Action>,
    /// Copies forwarded across links or flooded to other switches.
    pub copies: Vec<(SwitchId, Packet)>,
    /// Packets handed to the controller inbox.
    pub to_controller: Vec<Packet>,
    /// Packets dropped, with the unlinked port when `SendOut` missed.
    pub drops: Vec<(Packet, Option<i64>)>,
}

/// Apply one action sequence to a packet at a switch. `Change` rewrites the
/// header for subsequent actions in the same sequence.
pub fn apply_actions(
    net: &Network,
    sw: &SwitchId,
    pk: &Packet,
    actions: &[Action],
) -> Result<StepReport, EvalError> {
    if !net.has_switch(sw) {
        return Err(EvalError::UnknownSwitch(sw.clone()));
    }
    let mut report = StepReport::default();
    let mut current = pk.clone();
    for a in actions {
        report.actions.push(a.clone());
        match a {
            Action::SendController => report.to_controller.push(current.clone()),
            Action::SendAll => {
                for id in net.switch_ids() {
                    if id != sw {
                        report.copies.push((id.clone(), current.clone()));
                    }
                }
            }
            Action::SendOut(port) => match net.peer(sw, *port) {
                Some((dst, inport)) => {
                    let mut fwd = current.clone();
                    fwd.inport = inport;
                    report.copies.push((dst, fwd));
                }
                None => report.drops.push((current.clone(), Some(*port))),
            },
            Action::Change(field, v) => {
                change_header(&mut current, field, v)?;
            }
            Action::Prohibit => report.drops.push((current.clone(), None)),
        }
    }
    Ok(report)
}

fn change_header(pk: &mut Packet, field: &str, v: &Value) -> Result<(), EvalError> {
    match (field, v) {
        ("srcip", Value::Ip(a)) => pk.srcip = a.clone(),
        ("dstip", Value::Ip(a)) => pk.dstip = a.clone(),
        ("srcport", Value::Int(n)) => pk.srcport = *n,
        ("dstport", Value::Int(n)) => pk.dstport = *n,
        ("inport", Value::Int(n)) => pk.inport = *n,
        ("tag", Value::Int(n)) => pk.tag = n.to_string(),
        _ => {
            return Err(EvalError::BadShape(format!(
                "change({field}, {v}) does not name a header field of matching type"
            )))
        }
    }
    Ok(())
}

/// First-match flow-table processing of one packet arrival. The first rule
/// in the switch's table whose pattern matches fires; on a table miss the
/// network's configured miss action applies.
pub fn process_packet(
    net: &Network,
    sigma: &FlowTables,
    sw: &SwitchId,
    pk: &Packet,
) -> Result<StepReport, EvalError> {
    if !net.has_switch(sw) {
        return Err(EvalError::UnknownSwitch(sw.clone()));
    }
    for rule in sigma.rules(sw) {
        if pattern_matches(&rule.pattern, pk) {
            return apply_actions(net, sw, pk, &rule.actions);
        }
    }
    let miss = match net.miss_action {
        MissAction::Controller => vec![Action::SendController],
        MissAction::Drop => vec![Action::Prohibit],
    };
    apply_actions(net, sw, pk, &miss)
}

/// Append a treatment record to the history.
pub fn record_history(hist: &mut History, sw: SwitchId, pk: Packet, a: Action) {
    hist.record(sw, pk, a);
}

/// The `Send` statement effect shared by both semantics: for each
/// (switch, packet, action) triple, apply the action and append (packet,
/// action) to that switch's history.
pub fn send_event(ev: &Event, net: &Network, hist: &mut History) -> Result<(), EvalError> {
    for item in ev.iter() {
        match item {
            Value::Tuple(vs) => match vs.as_slice() {
                [Value::Switch(sw), Value::Packet(pk), Value::Action(a)] => {
                    apply_actions(net, sw, pk, std::slice::from_ref(a))?;
                    hist.record(sw.clone(), pk.clone(), a.clone());
                }
                _ => {
                    return Err(EvalError::BadShape(format!(
                        "Send expects (switch, packet, action) triples, got {item}"
                    )))
                }
            },
            _ => {
                return Err(EvalError::BadShape(format!(
                    "Send expects (switch, packet, action) triples, got {item}"
                )))
            }
        }
    }
    Ok(())
}

/// Topology file errors.
#[derive(Debug, Error)]
pub enum TopoError {
    #[error("line {line}: unknown directive `{directive}`")]
    UnknownDirective { line: usize, directive: String },
    #[error("line {line}: malformed `{directive}` directive: {msg}")]
    Malformed {
        line: usize,
        directive: String,
        msg: String,
    },
    #[error("link or packet references unknown switch `{0}`")]
    UnknownSwitch(SwitchId),
    #[error("port {port} out of range on `{switch}` ({ports} ports)")]
    PortOutOfRange {
        switch: SwitchId,
        port: i64,
        ports: i64,
    },
}

/// Parse a topology config: one directive per line, `#` comments.
///
/// ```text
/// switch <id> ports <n>
/// link <id>:<port> <id>:<port>
/// packet <switch> srcip=<a> dstip=<a> srcport=<n> dstport=<n> inport=<n>
/// prohibited <ip>
/// ```
pub fn parse_topology(text: &str) -> Result<Network, TopoError> {
    let mut net = Network::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let directive = words.next().unwrap().to_string();
        let rest: Vec<&str> = words.collect();
        let malformed = |msg: &str| TopoError::Malformed {
            line,
            directive: directive.clone(),
            msg: msg.to_string(),
        };
        match directive.as_str() {
            "switch" => match rest.as_slice() {
                [id, "ports", n] => {
                    let ports = n.parse::<i64>().map_err(|_| malformed("bad port count"))?;
                    net.switches.push((SwitchId::new(*id), ports));
                }
                _ => return Err(malformed("expected `switch <id> ports <n>`")),
            },
            "link" => match rest.as_slice() {
                [a, b] => {
                    let parse_end = |s: &str| -> Result<(SwitchId, i64), TopoError> {
                        let (id, port) = s.split_once(':').ok_or_else(|| malformed(s))?;
                        Ok((
                            SwitchId::new(id),
                            port.parse::<i64>().map_err(|_| malformed("bad port"))?,
                        ))
                    };
                    net.links.push(Link {
                        a: parse_end(a)?,
                        b: parse_end(b)?,
                    });
                }
                _ => return Err(malformed("expected `link <id>:<port> <id>:<port>`")),
            },
            "packet" => {
                let (sw, fields) = rest
                    .split_first()
                    .ok_or_else(|| malformed("missing switch"))?;
                let mut pk = Packet {
                    srcip: Ip::new("0.0.0.0"),
                    dstip: Ip::new("0.0.0.0"),
                    srcport: 0,
                    dstport: 0,
                    inport: 1,
                    tag: String::new(),
                };
                for f in fields {
                    let (k, v) = f
                        .split_once('=')
                        .ok_or_else(|| malformed("expected key=value fields"))?;
                    match k {
                        "srcip" => pk.srcip = Ip::new(v),
                        "dstip" => pk.dstip = Ip::new(v),
                        "srcport" => {
                            pk.srcport = v.parse().map_err(|_| malformed("bad srcport"))?
                        }
                        "dstport" => {
                            pk.dstport = v.parse().map_err(|_| malformed("bad dstport"))?
                        }
                        "inport" => pk.inport = v.parse().map_err(|_| malformed("bad inport"))?,
                        "tag" => pk.tag = v.to_string(),
                        _ => return Err(malformed(&format!("unknown field `{k}`"))),
                    }
                }
                net.pending.push((SwitchId::new(*sw), pk));
            }
            "prohibited" => match rest.as_slice() {
                [ip] => net.prohibited_ips.push(Ip::new(*ip)),
                _ => return Err(malformed("expected `prohibited <ip>`")),
            },
            _ => return Err(TopoError::UnknownDirective { line, directive }),
        }
    }
    net.validate()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Rule;

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

    fn two_switch_net() -> Network {
        parse_topology(
            "switch id1 ports 4\n\
             switch id2 ports 4\n\
             link id1:1 id2:1\n",
        )
        .unwrap()
    }

    #[test]
    fn queries_on_topology() {
        let mut net = two_switch_net();
        assert_eq!(
            run_query(&Query::Switches, &net),
            Event::new(vec![
                Value::Switch(SwitchId::new("id1")),
                Value::Switch(SwitchId::new("id2")),
            ])
        );
        net.pending.push((SwitchId::new("id1"), pk("1.1.1.1", 80, 2)));
        net.pending.push((SwitchId::new("id2"), pk("2.2.2.2", 22, 3)));
        let ips = run_query(&Query::SourceIps, &net);
        assert_eq!(ips.len(), 2);
        assert_eq!(
            ips.0[0],
            Value::Tuple(vec![
                Value::Ip(Ip::new("1.1.1.1")),
                Value::Packet(pk("1.1.1.1", 80, 2))
            ])
        );
        assert_eq!(
            run_query(&Query::Packets(Pattern::SrcPort(80)), &net).len(),
            1
        );
        // empty pending
        let empty = two_switch_net();
        assert!(run_query(&Query::Packets(Pattern::SrcPort(80)), &empty).is_empty());
        // queries are read-only
        let before = net.clone();
        run_query(&Query::SourceIps, &net);
        assert_eq!(net, before);
    }

    #[test]
    fn first_match_fires_only_first_rule() {
        let net = two_switch_net();
        let mut sigma = FlowTables::new();
        sigma.0.insert(
            SwitchId::new("id1"),
            vec![
                Rule {
                    pattern: Pattern::InPort(1),
                    actions: vec![Action::SendController],
                },
                Rule {
                    pattern: Pattern::MatchAll,
                    actions: vec![Action::SendAll],
                },
            ],
        );
        let report = process_packet(&net, &sigma, &SwitchId::new("id1"), &pk("1.1.1.1", 80, 1))
            .unwrap();
        assert_eq!(report.actions, vec![Action::SendController]);
        assert!(report.copies.is_empty());
    }

    #[test]
    fn first_match_over_all_two_rule_orderings() {
        // brute-force: for each ordering of two rules that both match,
        // exactly the first fires
        let net = two_switch_net();
        let r1 = Rule {
            pattern: Pattern::InPort(1),
            actions: vec![Action::SendController],
        };
        let r2 = Rule {
            pattern: Pattern::MatchAll,
            actions: vec![Action::SendAll],
        };
        for order in [[r1.clone(), r2.clone()], [r2.clone(), r1.clone()]] {
            let mut sigma = FlowTables::new();
            sigma.0.insert(SwitchId::new("id1"), order.to_vec());
            let report =
                process_packet(&net, &sigma, &SwitchId::new("id1"), &pk("1.1.1.1", 80, 1))
                    .unwrap();
            let expected = sigma.rules(&SwitchId::new("id1"))[0].actions.clone();
            assert_eq!(report.actions, expected);
        }
    }

    #[test]
    fn sendall_floods_all_other_switches() {
        let net = two_switch_net();
        let mut sigma = FlowTables::new();
        sigma.0.insert(
            SwitchId::new("id1"),
            vec![Rule {
                pattern: Pattern::SrcPort(80),
                actions: vec![Action::SendAll],
            }],
        );
        let p = pk("1.1.1.1", 80, 1);
        let report = process_packet(&net, &sigma, &SwitchId::new("id1"), &p).unwrap();
        assert_eq!(report.actions, vec![Action::SendAll]);
        assert_eq!(report.copies, vec![(SwitchId::new("id2"), p)]);
    }

    #[test]
    fn table_miss_defaults_to_controller() {
        let net = two_switch_net();
        let p = pk("1.1.1.1", 80, 1);
        let report = process_packet(&net, &FlowTables::new(), &SwitchId::new("id1"), &p).unwrap();
        assert_eq!(report.actions, vec![Action::SendController]);
        assert!(report.copies.is_empty());
        assert_eq!(report.to_controller, vec![p]);
    }

    #[test]
    fn unknown_switch_is_an_error_and_unlinked_port_drops() {
        let net = two_switch_net();
        let p = pk("1.1.1.1", 80, 1);
        assert!(process_packet(&net, &FlowTables::new(), &SwitchId::new("nope"), &p).is_err());
        let report =
            apply_actions(&net, &SwitchId::new("id1"), &p, &[Action::SendOut(3)]).unwrap();
        assert_eq!(report.drops, vec![(p, Some(3))]);
    }

    #[test]
    fn change_rewrites_header_for_subsequent_actions() {
        let net = two_switch_net();
        let p = pk("1.1.1.1", 80, 1);
        let report = apply_actions(
            &net,
            &SwitchId::new("id1"),
            &p,
            &[
                Action::Change("dstport".into(), Box::new(Value::Int(443))),
                Action::SendController,
            ],
        )
        .unwrap();
        assert_eq!(report.to_controller[0].dstport, 443);
    }

    #[test]
    fn matchall_sendall_yields_n_minus_one_copies() {
        let net = parse_topology(
            "switch a ports 2\nswitch b ports 2\nswitch c ports 2\nswitch d ports 2\n",
        )
        .unwrap();
        let mut sigma = FlowTables::new();
        sigma.0.insert(
            SwitchId::new("a"),
            vec![Rule {
                pattern: Pattern::MatchAll,
                actions: vec![Action::SendAll],
            }],
        );
        let report =
            process_packet(&net, &sigma, &SwitchId::new("a"), &pk("1.1.1.1", 80, 1)).unwrap();
        assert_eq!(report.copies.len(), net.switches.len() - 1);
    }

    #[test]
    fn topology_rejects_bad_input() {
        assert!(parse_topology("frobnicate id1").is_err());
        assert!(parse_topology("switch id1 ports 2\nlink id1:3 id1:1\n").is_err());
        assert!(parse_topology("packet id1 srcip=1.1.1.1\n").is_err());
    }
}
