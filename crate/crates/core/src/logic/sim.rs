use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::ff::{eval_gate, update_ff, Edge, FfKind, GateKind};
use super::Trace;
use crate::level::LogicLevel;
use crate::netlist::{
    flatten, is_rail, ComponentKind, Depth, Direction, EdgeMode, FlattenError, LibCell, Netlist,
    ATM, VAC,
};
use crate::stimulus::Stimulus;

/// Propagation delays in simulation units per primitive kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delays {
    pub not: u64,
    pub nand: u64,
    pub or: u64,
    pub ff: u64,
    /// Routing junctions; 0 makes them transparent wires.
    pub junction: u64,
}

impl Default for Delays {
    fn default() -> Self {
        Self::uniform(1)
    }
}

impl Delays {
    pub fn uniform(d: u64) -> Self {
        Self {
            not: d,
            nand: d,
            or: d,
            ff: d,
            junction: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub delays: Delays,
    /// Changes of one net within a single instant before giving up.
    pub max_changes_per_instant: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            delays: Delays::default(),
            max_changes_per_instant: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error("netlist has no top cell")]
    NoTop,
    #[error("component `{0}` is not a gate-level primitive")]
    NotGateLevel(String),
    #[error("stimulus drives `{0}`, which is not an input port")]
    StimulusNotInput(String),
    #[error("`init` names unknown net `{0}`")]
    UnknownNet(String),
    #[error("zero-delay oscillation at t={time} through {}", nets.join(", "))]
    OscillationAtInstant { time: u64, nets: Vec<String> },
}

#[derive(Debug, Clone)]
enum Node {
    Gate {
        kind: GateKind,
        delay: u64,
        inputs: Vec<usize>,
        output: usize,
    },
    Ff {
        kind: FfKind,
        mode: EdgeMode,
        data: Vec<usize>,
        clk: usize,
        q: usize,
        qbar: usize,
        state: LogicLevel,
    },
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    level: LogicLevel,
    seq: u64,
}

/// Gate-level circuit compiled for simulation.
struct Circuit {
    names: Vec<String>,
    index: HashMap<String, usize>,
    nodes: Vec<Node>,
    fanout: Vec<Vec<usize>>,
}

impl Circuit {
    fn build(netlist: &Netlist, delays: &Delays) -> Result<(Circuit, Vec<String>), SimError> {
        let top = netlist.top_cell().ok_or(SimError::NoTop)?;
        let flat = flatten(netlist, &top.name, Depth::Gate)?;
        let cell = flat.top_cell().ok_or(SimError::NoTop)?;
        let mut c = Circuit {
            names: Vec::new(),
            index: HashMap::new(),
            nodes: Vec::new(),
            fanout: Vec::new(),
        };
        for rail in [VAC, ATM] {
            c.net(rail);
        }
        for p in cell.port_names() {
            c.net(p);
        }
        for n in &cell.nets {
            c.net(n);
        }
        let inputs: Vec<String> = cell
            .ports
            .iter()
            .filter(|p| p.dir != Direction::Out)
            .map(|p| p.name.clone())
            .collect();

        for comp in &cell.components {
            let node = match &comp.kind {
                ComponentKind::Junction { inputs, output } => Node::Gate {
                    kind: GateKind::Or(inputs.len()),
                    delay: delays.junction,
                    inputs: inputs.iter().map(|n| c.net(n)).collect(),
                    output: c.net(output),
                },
                ComponentKind::Actuator { .. } | ComponentKind::Chamber { .. } => continue,
                ComponentKind::Instance {
                    cell: lib,
                    params,
                    ports,
                } => {
                    let lib = LibCell::lookup(lib)
                        .filter(|l| l.is_gate_primitive())
                        .ok_or_else(|| SimError::NotGateLevel(comp.name.clone()))?;
                    let mut pin = |p: &str| c.net(&ports[p]);
                    match lib {
                        LibCell::Not => Node::Gate {
                            kind: GateKind::Not,
                            delay: delays.not,
                            inputs: vec![pin("a")],
                            output: pin("y"),
                        },
                        LibCell::Nand(n) => Node::Gate {
                            kind: GateKind::Nand(n),
                            delay: delays.nand,
                            inputs: (1..=n).map(|i| pin(&format!("a{i}"))).collect(),
                            output: pin("y"),
                        },
                        LibCell::Or2 => Node::Gate {
                            kind: GateKind::Or(2),
                            delay: delays.or,
                            inputs: vec![pin("a1"), pin("a2")],
                            output: pin("y"),
                        },
                        LibCell::TffBehav | LibCell::JkffBehav => {
                            let (kind, data) = if lib == LibCell::TffBehav {
                                (FfKind::T, vec![pin("T")])
                            } else {
                                (FfKind::Jk, vec![pin("J"), pin("K")])
                            };
                            let state = match params.get("init").map(String::as_str) {
                                Some("0") => LogicLevel::L0,
                                Some("1") => LogicLevel::L1,
                                _ => LogicLevel::LX,
                            };
                            Node::Ff {
                                kind,
                                mode: params
                                    .get("edge")
                                    .and_then(|e| EdgeMode::parse(e))
                                    .unwrap_or_default(),
                                data,
                                clk: pin("CLK"),
                                q: pin("Q"),
                                qbar: pin("Qbar"),
                                state,
                            }
                        }
                        _ => return Err(SimError::NotGateLevel(comp.name.clone())),
                    }
                }
                _ => return Err(SimError::NotGateLevel(comp.name.clone())),
            };
            c.nodes.push(node);
        }
        c.fanout = vec![Vec::new(); c.names.len()];
        for (i, node) in c.nodes.iter().enumerate() {
            let sensitive: Vec<usize> = match node {
                Node::Gate { inputs, .. } => inputs.clone(),
                Node::Ff { data, clk, .. } => data.iter().copied().chain([*clk]).collect(),
            };
            for n in sensitive {
                if !c.fanout[n].contains(&i) {
                    c.fanout[n].push(i);
                }
            }
        }
        Ok((c, inputs))
    }

    fn net(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

struct Engine {
    circuit: Circuit,
    levels: Vec<LogicLevel>,
    /// Nets forced by `init` whose drivers have not yet produced a known
    /// value; unknown results from those drivers are ignored.
    hold_init: Vec<bool>,
    pending: Vec<Option<Pending>>,
    queue: BinaryHeap<Reverse<(u64, usize, u64)>>,
    seq: u64,
    trace: Trace,
}

impl Engine {
    fn schedule(&mut self, now: u64, net: usize, level: LogicLevel, delay: u64) {
        if level == LogicLevel::LX && self.hold_init[net] {
            return;
        }
        if level.is_known() {
            self.hold_init[net] = false;
        }
        if let Some(p) = self.pending[net] {
            if p.level == level {
                return;
            }
            self.pending[net] = None;
        }
        if self.levels[net] == level {
            return;
        }
        self.seq += 1;
        let time = now + delay;
        self.pending[net] = Some(Pending {
            level,
            seq: self.seq,
        });
        self.queue.push(Reverse((time, net, self.seq)));
    }

    fn evaluate(&mut self, now: u64, node: usize, changed: &[(usize, LogicLevel)], ff_delay: u64) {
        match &mut self.circuit.nodes[node] {
            Node::Gate {
                kind,
                delay,
                inputs,
                output,
            } => {
                let ins: Vec<LogicLevel> = inputs.iter().map(|&n| self.levels[n]).collect();
                let v = eval_gate(*kind, &ins).expect("arity fixed at build");
                let (out, d) = (*output, *delay);
                self.schedule(now, out, v, d);
            }
            Node::Ff {
                kind,
                mode,
                data,
                clk,
                q,
                qbar,
                state,
            } => {
                let Some(&(_, old)) = changed.iter().find(|(n, _)| n == clk) else {
                    return;
                };
                let Some(edge) = Edge::between(old, self.levels[*clk]) else {
                    return;
                };
                let ins: Vec<LogicLevel> = data.iter().map(|&n| self.levels[n]).collect();
                *state = update_ff(*kind, *mode, edge, &ins, *state);
                let (s, q, qbar) = (*state, *q, *qbar);
                self.schedule(now, q, s, ff_delay);
                self.schedule(now, qbar, !s, ff_delay);
            }
        }
    }

    /// Applies a batch of changes at `now` and re-evaluates their fanout.
    fn apply(&mut self, now: u64, changes: Vec<(usize, LogicLevel)>, ff_delay: u64) {
        let mut changed = Vec::new();
        for (net, level) in changes {
            let old = self.levels[net];
            if old == level {
                continue;
            }
            self.levels[net] = level;
            self.trace.record(&self.circuit.names[net], now, level);
            changed.push((net, old));
        }
        let mut nodes: Vec<usize> = changed
            .iter()
            .flat_map(|(n, _)| self.circuit.fanout[*n].iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        for node in nodes {
            self.evaluate(now, node, &changed, ff_delay);
        }
    }
}

/// Event-driven simulation with inertial delays.
///
/// Nets start at LX except rails, stimulus-driven nets and `init` nets. At
/// each instant, stimulus changes are applied first, so a gate event due at
/// the same instant is cancelled when the re-evaluation it triggers
/// disagrees. Runs until `until` or until nothing is pending.
pub fn simulate(
    netlist: &Netlist,
    stim: &Stimulus,
    options: &SimOptions,
    until: u64,
) -> Result<Trace, SimError> {
    let (circuit, inputs) = Circuit::build(netlist, &options.delays)?;
    let driven = stim.driven_nets();
    for net in &driven {
        if !inputs.contains(net) || is_rail(net) {
            return Err(SimError::StimulusNotInput(net.clone()));
        }
    }
    let n = circuit.names.len();
    let mut engine = Engine {
        levels: vec![LogicLevel::LX; n],
        hold_init: vec![false; n],
        pending: vec![None; n],
        queue: BinaryHeap::new(),
        seq: 0,
        trace: Trace::new(until),
        circuit,
    };
    engine.trace.stimulus_nets = driven;
    let ff_delay = options.delays.ff;

    engine.levels[engine.circuit.index[VAC]] = LogicLevel::L1;
    engine.levels[engine.circuit.index[ATM]] = LogicLevel::L0;
    for (net, level) in &stim.inits {
        let &i = engine
            .circuit
            .index
            .get(net)
            .ok_or_else(|| SimError::UnknownNet(net.clone()))?;
        engine.levels[i] = LogicLevel::from_bool(*level);
        engine.hold_init[i] = true;
    }
    // Flip-flops without an explicit init inherit a forced Q.
    let mut ff_outputs = Vec::new();
    for node in engine.circuit.nodes.iter_mut() {
        if let Node::Ff { q, qbar, state, .. } = node {
            if *state == LogicLevel::LX && engine.hold_init[*q] {
                *state = engine.levels[*q];
            }
            if state.is_known() {
                ff_outputs.push((*q, *state));
                ff_outputs.push((*qbar, !*state));
            }
        }
    }
    for (net, level) in ff_outputs {
        engine.levels[net] = level;
        engine.hold_init[net] = false;
    }
    for (i, name) in engine.circuit.names.iter().enumerate() {
        if !is_rail(name) {
            engine.trace.declare(name, engine.levels[i]);
        }
    }

    let events = stim.expand(until);
    let mut next_stim = 0;
    // Stimulus values at t=0 are applied as the first batch, then every
    // gate is evaluated once.
    let mut first = Vec::new();
    while next_stim < events.len() && events[next_stim].time == 0 {
        let e = &events[next_stim];
        first.push((engine.circuit.index[&e.net], LogicLevel::from_bool(e.level)));
        next_stim += 1;
    }
    for (net, level) in first {
        engine.levels[net] = level;
        engine.trace.record(&engine.circuit.names[net], 0, level);
    }
    for node in 0..engine.circuit.nodes.len() {
        if matches!(engine.circuit.nodes[node], Node::Gate { .. }) {
            engine.evaluate(0, node, &[], ff_delay);
        }
    }

    let mut now;
    loop {
        let gate_t = engine.queue.peek().map(|Reverse((t, _, _))| *t);
        let stim_t = events.get(next_stim).map(|e| e.time);
        now = match (gate_t, stim_t) {
            (None, None) => break,
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
        };
        if now > until {
            break;
        }
        let mut batch = Vec::new();
        while next_stim < events.len() && events[next_stim].time == now {
            let e = &events[next_stim];
            batch.push((engine.circuit.index[&e.net], LogicLevel::from_bool(e.level)));
            next_stim += 1;
        }
        if !batch.is_empty() {
            engine.apply(now, batch, ff_delay);
        }

        let mut counts: HashMap<usize, usize> = HashMap::new();
        loop {
            let mut batch = Vec::new();
            while let Some(&Reverse((t, net, seq))) = engine.queue.peek() {
                if t != now {
                    break;
                }
                engine.queue.pop();
                match engine.pending[net] {
                    Some(p) if p.seq == seq => {
                        engine.pending[net] = None;
                        batch.push((net, p.level));
                    }
                    _ => {}
                }
            }
            if batch.is_empty() {
                break;
            }
            for &(net, _) in &batch {
                let c = counts.entry(net).or_default();
                *c += 1;
                if *c > options.max_changes_per_instant {
                    let mut nets: Vec<String> = counts
                        .iter()
                        .filter(|(_, &k)| k > options.max_changes_per_instant / 2)
                        .map(|(&n, _)| engine.circuit.names[n].clone())
                        .collect();
                    nets.sort();
                    return Err(SimError::OscillationAtInstant { time: now, nets });
                }
            }
            engine.apply(now, batch, ff_delay);
        }
    }
    Ok(engine.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Cell, Component};
    use LogicLevel::*;

    fn ring(n: usize) -> Netlist {
        let mut cell = Cell::new("ring");
        for i in 0..n {
            let a = format!("n{i}");
            let y = format!("n{}", (i + 1) % n);
            cell = cell.component(Component::instance(&format!("g{i}"), "NOT", &[("a", &a), ("y", &y)]));
        }
        cell.declare_used_nets();
        let mut nl = Netlist::new().with_cell(cell);
        nl.top = Some("ring".into());
        nl
    }

    #[test]
    fn three_inverter_ring_oscillates_with_period_six() {
        let stim = Stimulus::default().init("n0", false);
        let tr = simulate(&ring(3), &stim, &SimOptions::default(), 30).unwrap();
        let rises = tr.edges_to("n0", L1);
        assert_eq!(rises[..3], [3, 9, 15]);
        assert_eq!(tr.edges_to("n0", L0)[..2], [6, 12]);
    }

    #[test]
    fn uninitialized_ring_stays_unknown() {
        let tr = simulate(&ring(3), &Stimulus::default(), &SimOptions::default(), 30).unwrap();
        assert_eq!(tr.changes("n0"), &[(0, LX)]);
    }

    #[test]
    fn zero_delay_loop_is_reported() {
        let mut cell = Cell::new("loop")
            .component(Component::junction("j1", &["b"], "a"))
            .component(Component::instance("inv", "NOT", &[("a", "a"), ("y", "b")]));
        cell.declare_used_nets();
        let mut nl = Netlist::new().with_cell(cell);
        nl.top = Some("loop".into());
        let opts = SimOptions {
            delays: Delays {
                not: 0,
                ..Delays::default()
            },
            max_changes_per_instant: 50,
        };
        let err = simulate(&nl, &Stimulus::default().init("a", false), &opts, 10).unwrap_err();
        match err {
            SimError::OscillationAtInstant { time, nets } => {
                assert_eq!(time, 0);
                assert!(nets.contains(&"a".to_string()));
            }
            e => panic!("{e}"),
        }
    }

    fn latch() -> Netlist {
        let cell = Cell::new("l")
            .port("nS", Direction::In)
            .port("nR", Direction::In)
            .port("Q", Direction::Out)
            .port("Qbar", Direction::Out)
            .component(Component::instance(
                "u",
                "SR_LATCH",
                &[("nS", "nS"), ("nR", "nR"), ("Q", "Q"), ("Qbar", "Qbar")],
            ));
        let mut nl = Netlist::new().with_cell(cell);
        nl.top = Some("l".into());
        nl
    }

    #[test]
    fn sr_latch_set_then_reset() {
        let stim = Stimulus::default()
            .event(0, "nS", true)
            .event(0, "nR", true)
            .event(5, "nS", false)
            .event(8, "nS", true)
            .event(15, "nR", false)
            .event(18, "nR", true);
        let tr = simulate(&latch(), &stim, &SimOptions::default(), 30).unwrap();
        assert_eq!(tr.level_at("Q", 4), Some(LX));
        assert_eq!(tr.level_at("Q", 14), Some(L1));
        assert_eq!(tr.level_at("Qbar", 14), Some(L0));
        assert_eq!(tr.level_at("Q", 30), Some(L0));
        assert_eq!(tr.level_at("Qbar", 30), Some(L1));
    }

    #[test]
    fn inertial_delay_swallows_short_pulses() {
        let cell = Cell::new("d")
            .port("a", Direction::In)
            .port("y", Direction::Out)
            .component(Component::instance("g", "NOT", &[("a", "a"), ("y", "y")]));
        let mut nl = Netlist::new().with_cell(cell);
        nl.top = Some("d".into());
        let opts = SimOptions {
            delays: Delays::uniform(3),
            ..Default::default()
        };
        let stim = Stimulus::default()
            .event(0, "a", false)
            .event(10, "a", true)
            .event(12, "a", false);
        let tr = simulate(&nl, &stim, &opts, 30).unwrap();
        assert_eq!(tr.changes("y"), &[(0, LX), (3, L1)]);
    }

    #[test]
    fn stimulus_must_target_inputs() {
        let stim = Stimulus::default().event(0, "Q", true);
        assert!(matches!(
            simulate(&latch(), &stim, &SimOptions::default(), 5),
            Err(SimError::StimulusNotInput(_))
        ));
    }

    #[test]
    fn deterministic() {
        let stim = Stimulus::default().init("n0", false);
        let a = simulate(&ring(5), &stim, &SimOptions::default(), 100).unwrap();
        let b = simulate(&ring(5), &stim, &SimOptions::default(), 100).unwrap();
        assert_eq!(a, b);
    }
}
