use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::table::{CoverExpr, Cube};
use crate::fsm::{bit_net, bit_net_bar, FsmSpec, StateEncoding};
use crate::netlist::{Cell, Component, Direction, EdgeMode, Netlist, ATM, MAX_NAND_INPUTS, VAC};

/// Memory element used for state bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipFlopStyle {
    Structural,
    Behavioral(EdgeMode),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapOptions {
    pub flip_flops: FlipFlopStyle,
    /// Output ORs become lossless routing junctions instead of NAND logic.
    pub ideal_routing: bool,
    pub max_fan_in: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            flip_flops: FlipFlopStyle::Structural,
            ideal_routing: false,
            max_fan_in: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("`{signal}` needs a NAND with {fan_in} inputs; the limit is {max}")]
    NandFanInExceeded {
        signal: String,
        fan_in: usize,
        max: usize,
    },
    #[error("max fan-in must be between 2 and {MAX_NAND_INPUTS}, got {0}")]
    BadFanInLimit(usize),
    #[error("expected {expected} covers for {what}, got {got}")]
    CoverCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

struct Mapper<'a> {
    spec: &'a FsmSpec,
    enc: &'a StateEncoding,
    opts: &'a MapOptions,
    cell: Cell,
    taken: HashSet<String>,
    counter: usize,
    inverted: HashMap<String, String>,
    nands: HashMap<Vec<String>, String>,
    ands: HashMap<Cube, String>,
    sops: HashMap<Vec<Cube>, String>,
}

impl Mapper<'_> {
    fn fresh(&mut self, stem: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{stem}{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn add(&mut self, c: Component) {
        self.cell.components.push(c);
    }

    fn literal(&mut self, var: usize, positive: bool) -> String {
        let bits = self.enc.bits;
        if var < bits {
            return if positive {
                bit_net(bits, var)
            } else {
                bit_net_bar(bits, var)
            };
        }
        let input = self.spec.inputs[var - bits].clone();
        if positive {
            input
        } else {
            self.invert(&input)
        }
    }

    fn invert(&mut self, net: &str) -> String {
        if let Some(n) = self.inverted.get(net) {
            return n.clone();
        }
        let out = self.fresh("n");
        let name = self.fresh("inv");
        self.add(Component::instance(&name, "NOT", &[("a", net), ("y", &out)]));
        self.inverted.insert(net.to_string(), out.clone());
        out
    }

    fn nand(&mut self, signal: &str, mut inputs: Vec<String>) -> Result<String, MapError> {
        if inputs.len() == 1 {
            return Ok(self.invert(&inputs[0]));
        }
        if inputs.len() > self.opts.max_fan_in {
            return Err(MapError::NandFanInExceeded {
                signal: signal.to_string(),
                fan_in: inputs.len(),
                max: self.opts.max_fan_in,
            });
        }
        inputs.sort();
        if let Some(n) = self.nands.get(&inputs) {
            return Ok(n.clone());
        }
        let out = self.fresh("w");
        let name = self.fresh("nand");
        let formals: Vec<String> = (1..=inputs.len()).map(|i| format!("a{i}")).collect();
        let mut pins: Vec<(&str, &str)> = formals
            .iter()
            .map(String::as_str)
            .zip(inputs.iter().map(String::as_str))
            .collect();
        pins.push(("y", &out));
        let cell = format!("NAND{}", inputs.len());
        self.add(Component::instance(&name, &cell, &pins));
        self.nands.insert(inputs, out.clone());
        Ok(out)
    }

    fn term_literals(&mut self, t: &Cube) -> Vec<String> {
        t.literals()
            .into_iter()
            .map(|(j, pos)| self.literal(j, pos))
            .collect()
    }

    /// Net carrying the AND of a term's literals.
    fn and_term(&mut self, signal: &str, t: &Cube) -> Result<String, MapError> {
        let lits = self.term_literals(t);
        match lits.len() {
            0 => Ok(VAC.into()),
            1 => Ok(lits[0].clone()),
            _ => {
                if let Some(n) = self.ands.get(t) {
                    return Ok(n.clone());
                }
                let n = self.nand(signal, lits)?;
                let out = self.invert(&n);
                self.ands.insert(*t, out.clone());
                Ok(out)
            }
        }
    }

    /// Net carrying the complement of a term.
    fn nand_term(&mut self, signal: &str, t: &Cube) -> Result<String, MapError> {
        let lits = t.literals();
        if lits.len() == 1 {
            let (j, pos) = lits[0];
            return Ok(self.literal(j, !pos));
        }
        let nets = self.term_literals(t);
        self.nand(signal, nets)
    }

    /// Two-level NAND-NAND realization of a cover.
    fn sop(&mut self, signal: &str, cover: &CoverExpr) -> Result<String, MapError> {
        if cover.is_const_zero() {
            return Ok(ATM.into());
        }
        if cover.is_const_one() {
            return Ok(VAC.into());
        }
        if let Some(n) = self.sops.get(&cover.terms) {
            return Ok(n.clone());
        }
        let net = if cover.terms.len() == 1 {
            self.and_term(signal, &cover.terms[0])?
        } else {
            let mut ins = Vec::new();
            for t in &cover.terms {
                ins.push(self.nand_term(signal, t)?);
            }
            if ins.len() > self.opts.max_fan_in {
                return Err(MapError::NandFanInExceeded {
                    signal: signal.to_string(),
                    fan_in: ins.len(),
                    max: self.opts.max_fan_in,
                });
            }
            self.nand(signal, ins)?
        };
        self.sops.insert(cover.terms.clone(), net.clone());
        Ok(net)
    }
}

/// Builds the gate-level circuit. Ports are `VAC`, `CLK`, the inputs, then
/// the outputs; state bits appear as nets `Q`/`Qbar` (or `Q0`, `Q0bar`,
/// ...). Simple covers reuse existing nets; outputs are attached to their
/// driving net through routing junctions, which cost no valves.
pub fn map_to_gates(
    t_covers: &[CoverExpr],
    output_covers: &[CoverExpr],
    spec: &FsmSpec,
    enc: &StateEncoding,
    opts: &MapOptions,
) -> Result<Netlist, MapError> {
    if !(2..=MAX_NAND_INPUTS).contains(&opts.max_fan_in) {
        return Err(MapError::BadFanInLimit(opts.max_fan_in));
    }
    if t_covers.len() != enc.bits {
        return Err(MapError::CoverCount {
            what: "state bits",
            expected: enc.bits,
            got: t_covers.len(),
        });
    }
    if output_covers.len() != spec.outputs.len() {
        return Err(MapError::CoverCount {
            what: "outputs",
            expected: spec.outputs.len(),
            got: output_covers.len(),
        });
    }
    let mut cell = Cell::new(spec.name.clone())
        .port(VAC, Direction::Inout)
        .port("CLK", Direction::In);
    for i in &spec.inputs {
        cell = cell.port(i, Direction::In);
    }
    for o in &spec.outputs {
        cell = cell.port(o, Direction::Out);
    }
    let mut taken: HashSet<String> = cell.port_names().map(String::from).collect();
    for i in 0..enc.bits {
        taken.insert(bit_net(enc.bits, i));
        taken.insert(bit_net_bar(enc.bits, i));
    }
    let mut m = Mapper {
        spec,
        enc,
        opts,
        cell,
        taken,
        counter: 0,
        inverted: HashMap::new(),
        nands: HashMap::new(),
        ands: HashMap::new(),
        sops: HashMap::new(),
    };

    for (i, cover) in t_covers.iter().enumerate() {
        let q = bit_net(enc.bits, i);
        let t = m.sop(&format!("T of {q}"), cover)?;
        let name = if enc.bits == 1 {
            "ff".to_string()
        } else {
            format!("ff{i}")
        };
        let qbar = bit_net_bar(enc.bits, i);
        let pins = [("T", t.as_str()), ("CLK", "CLK"), ("Q", &q), ("Qbar", &qbar)];
        let comp = match opts.flip_flops {
            FlipFlopStyle::Structural => Component::instance(&name, "TFF_STRUCT", &pins),
            FlipFlopStyle::Behavioral(edge) => Component::instance(&name, "TFF_BEHAV", &pins)
                .with_param("edge", edge.keyword())
                .with_param("init", "0"),
        };
        m.add(comp);
    }

    for (o, cover) in spec.outputs.iter().zip(output_covers) {
        let sources = if opts.ideal_routing && cover.terms.len() > 1 {
            let mut v = Vec::new();
            for t in &cover.terms {
                v.push(m.and_term(o, t)?);
            }
            v
        } else {
            vec![m.sop(o, cover)?]
        };
        let srcs: Vec<&str> = sources.iter().map(String::as_str).collect();
        m.add(Component::junction(&format!("route_{o}"), &srcs, o));
    }

    let mut cell = m.cell;
    cell.declare_used_nets();
    let mut netlist = Netlist::new().with_cell(cell);
    netlist.top = Some(spec.name.clone());
    Ok(netlist)
}
