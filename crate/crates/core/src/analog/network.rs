use std::collections::HashMap;

use super::AnalogParams;
use crate::netlist::{flatten, ComponentKind, Depth, Direction, FlattenError, Netlist, ATM, VAC};

/// How a node's pressure is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeRole {
    /// Rail at a fixed pressure.
    Rail(f64),
    /// Driven by the stimulus.
    Source,
    /// Integrated; the payload is the unknown's index.
    Free(usize),
}

#[derive(Debug, Clone)]
pub struct ValveInfo {
    pub name: String,
    pub gate: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub struct JunctionInfo {
    pub inputs: Vec<usize>,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalogError {
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error("netlist has no top cell")]
    NoTop,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("component `{0}` cannot be simulated at valve level")]
    Unsupported(String),
    #[error("node `{0}` has no resistive path to a rail or source")]
    FloatingNode(String),
    #[error("stimulus drives `{0}`, which is not an input port")]
    StimulusNotInput(String),
    #[error("`init` names unknown net `{0}`")]
    UnknownNet(String),
    #[error("linear solve failed at t={time}s")]
    NonConvergence { time: f64 },
}

/// Valve-level netlist compiled into an RC network description.
#[derive(Debug, Clone)]
pub struct Network {
    pub names: Vec<String>,
    pub index: HashMap<String, usize>,
    pub roles: Vec<NodeRole>,
    /// Net index of each unknown.
    pub free: Vec<usize>,
    /// Capacitance of each unknown.
    pub cap: Vec<f64>,
    /// Fixed conductances `(node, node, g)`.
    pub fixed: Vec<(usize, usize, f64)>,
    pub valves: Vec<ValveInfo>,
    pub junctions: Vec<JunctionInfo>,
    /// Nodes carrying actuators, with their engage thresholds.
    pub actuators: Vec<(usize, f64)>,
}

impl Network {
    /// `sources` are the stimulus-driven nets; they must be input ports.
    pub fn build(
        netlist: &Netlist,
        sources: &[String],
        params: &AnalogParams,
    ) -> Result<Network, AnalogError> {
        params.validate().map_err(AnalogError::Params)?;
        let top = netlist.top_cell().ok_or(AnalogError::NoTop)?;
        let flat = flatten(netlist, &top.name, Depth::Valve)?;
        let cell = flat.top_cell().ok_or(AnalogError::NoTop)?;

        let mut names: Vec<String> = vec![VAC.into(), ATM.into()];
        for n in cell.port_names().chain(cell.nets.iter().map(String::as_str)) {
            if !names.iter().any(|m| m == n) {
                names.push(n.to_string());
            }
        }
        let index: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        for s in sources {
            let ok = cell
                .find_port(s)
                .is_some_and(|p| p.dir != Direction::Out && s != VAC);
            if !ok {
                return Err(AnalogError::StimulusNotInput(s.clone()));
            }
        }

        let mut roles = vec![NodeRole::Rail(params.p_vac), NodeRole::Rail(0.0)];
        let mut free = Vec::new();
        for name in &names[2..] {
            if sources.contains(name) {
                roles.push(NodeRole::Source);
            } else {
                roles.push(NodeRole::Free(free.len()));
                free.push(index[name]);
            }
        }
        let mut net = Network {
            cap: vec![params.c_node; free.len()],
            names,
            index,
            roles,
            free,
            fixed: Vec::new(),
            valves: Vec::new(),
            junctions: Vec::new(),
            actuators: Vec::new(),
        };
        let index = net.index.clone();
        let id = |n: &str| index[n];
        for comp in &cell.components {
            match &comp.kind {
                ComponentKind::Valve {
                    gate,
                    port_a,
                    port_b,
                } => {
                    let v = ValveInfo {
                        name: comp.name.clone(),
                        gate: id(gate),
                        a: id(port_a),
                        b: id(port_b),
                    };
                    net.add_cap(v.gate, params.c_gate);
                    net.valves.push(v);
                }
                ComponentKind::Restriction {
                    port_a,
                    port_b,
                    resistance,
                } => {
                    let g = 1.0 / resistance.resolve(params.r_pull);
                    net.fixed.push((id(port_a), id(port_b), g));
                }
                ComponentKind::Chamber { node, capacitance } => {
                    net.add_cap(id(node), capacitance.resolve(params.c_node));
                }
                ComponentKind::Actuator {
                    node,
                    capacitance,
                    engage_threshold,
                } => {
                    net.add_cap(id(node), capacitance.resolve(params.c_act));
                    net.actuators
                        .push((id(node), engage_threshold.resolve(params.p_eng)));
                }
                ComponentKind::Junction { inputs, output } => {
                    net.junctions.push(JunctionInfo {
                        inputs: inputs.iter().map(|n| id(n)).collect(),
                        output: id(output),
                    });
                }
                ComponentKind::Instance { .. } => {
                    return Err(AnalogError::Unsupported(comp.name.clone()))
                }
            }
        }
        net.check_floating()?;
        Ok(net)
    }

    fn add_cap(&mut self, node: usize, c: f64) {
        if let NodeRole::Free(k) = self.roles[node] {
            self.cap[k] += c;
        }
    }

    /// Every unknown must reach a pinned node through resistive elements.
    fn check_floating(&self) -> Result<(), AnalogError> {
        let n = self.names.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut link = |a: usize, b: usize| {
            adj[a].push(b);
            adj[b].push(a);
        };
        for &(a, b, _) in &self.fixed {
            link(a, b);
        }
        for v in &self.valves {
            link(v.a, v.b);
        }
        // A junction output is driven by a source of its own.
        let mut reached = vec![false; n];
        let mut stack: Vec<usize> = (0..n)
            .filter(|&i| !matches!(self.roles[i], NodeRole::Free(_)))
            .chain(self.junctions.iter().map(|j| j.output))
            .collect();
        for &s in &stack {
            reached[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        match self.free.iter().find(|&&i| !reached[i]) {
            Some(&i) => Err(AnalogError::FloatingNode(self.names[i].clone())),
            None => Ok(()),
        }
    }
}
