//! Built-in fluidic cells.
//!
//! Every gate is built from the normally-closed valve. A NOT gate pulls its
//! output toward vacuum through a restriction and vents it to atmosphere
//! through one valve gated by the input. NAND_n stacks n valves in series
//! between the output and atmosphere, so the output vents only when every
//! input carries vacuum. The SR latch is two cross-coupled NAND2 gates and the
//! structural T flip-flop adds two NAND3 steering gates in front of a latch.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Cell, Component, Direction, Magnitude, Port, ATM, VAC};

pub const MAX_NAND_INPUTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LibCell {
    Not,
    Nand(usize),
    /// Valved OR: two parallel valves from vacuum to the output plus a vent.
    Or2,
    SrLatch,
    TffStruct,
    TffBehav,
    JkffBehav,
}

/// Clock edges a behavioral flip-flop reacts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    #[default]
    Rising,
    Falling,
    Both,
}

impl EdgeMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rising" => Some(EdgeMode::Rising),
            "falling" => Some(EdgeMode::Falling),
            "both" => Some(EdgeMode::Both),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            EdgeMode::Rising => "rising",
            EdgeMode::Falling => "falling",
            EdgeMode::Both => "both",
        }
    }
}

/// Which latch output feeds each steering NAND3 of the structural T
/// flip-flop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feedback {
    /// nS = NAND3(T, CLK, Qbar), nR = NAND3(T, CLK, Q). Toggles.
    #[default]
    Cross,
    /// nS = NAND3(T, CLK, Q), nR = NAND3(T, CLK, Qbar). Never toggles.
    Same,
}

impl LibCell {
    pub fn lookup(name: &str) -> Option<LibCell> {
        match name {
            "NOT" => Some(LibCell::Not),
            "OR2" => Some(LibCell::Or2),
            "SR_LATCH" => Some(LibCell::SrLatch),
            "TFF_STRUCT" => Some(LibCell::TffStruct),
            "TFF_BEHAV" => Some(LibCell::TffBehav),
            "JKFF_BEHAV" => Some(LibCell::JkffBehav),
            _ => {
                let n: usize = name.strip_prefix("NAND")?.parse().ok()?;
                if (2..=MAX_NAND_INPUTS).contains(&n) && name == format!("NAND{n}") {
                    Some(LibCell::Nand(n))
                } else {
                    None
                }
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            LibCell::Not => "NOT".into(),
            LibCell::Nand(n) => format!("NAND{n}"),
            LibCell::Or2 => "OR2".into(),
            LibCell::SrLatch => "SR_LATCH".into(),
            LibCell::TffStruct => "TFF_STRUCT".into(),
            LibCell::TffBehav => "TFF_BEHAV".into(),
            LibCell::JkffBehav => "JKFF_BEHAV".into(),
        }
    }

    pub fn ports(self) -> Vec<Port> {
        use Direction::{In, Out};
        let p = Port::new;
        match self {
            LibCell::Not => vec![p("a", In), p("y", Out)],
            LibCell::Nand(n) => {
                let mut v: Vec<Port> = (1..=n).map(|i| p(&format!("a{i}"), In)).collect();
                v.push(p("y", Out));
                v
            }
            LibCell::Or2 => vec![p("a1", In), p("a2", In), p("y", Out)],
            LibCell::SrLatch => vec![p("nS", In), p("nR", In), p("Q", Out), p("Qbar", Out)],
            LibCell::TffStruct | LibCell::TffBehav => {
                vec![p("T", In), p("CLK", In), p("Q", Out), p("Qbar", Out)]
            }
            LibCell::JkffBehav => vec![
                p("J", In),
                p("K", In),
                p("CLK", In),
                p("Q", Out),
                p("Qbar", Out),
            ],
        }
    }

    /// Parameter keys accepted on instances of this cell.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            LibCell::TffStruct => &["feedback"],
            LibCell::TffBehav | LibCell::JkffBehav => &["edge", "init"],
            _ => &[],
        }
    }

    /// Checks one instance parameter, returning a reason on failure.
    pub fn check_param(self, key: &str, value: &str) -> Result<(), String> {
        if !self.param_keys().contains(&key) {
            return Err(format!("cell {} has no parameter `{key}`", self.name()));
        }
        let ok = match key {
            "feedback" => matches!(value, "cross" | "same"),
            "edge" => EdgeMode::parse(value).is_some(),
            "init" => matches!(value, "0" | "1"),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid value `{value}` for parameter `{key}`"))
        }
    }

    /// Clocked cells simulated by state update rather than gates.
    pub fn is_behavioral(self) -> bool {
        matches!(self, LibCell::TffBehav | LibCell::JkffBehav)
    }

    /// Cells kept atomic in a gate-level netlist.
    pub fn is_gate_primitive(self) -> bool {
        matches!(
            self,
            LibCell::Not | LibCell::Nand(_) | LibCell::Or2 | LibCell::TffBehav | LibCell::JkffBehav
        )
    }

    /// Valves after full expansion; `None` for behavioral cells.
    pub fn valve_count(self) -> Option<usize> {
        match self {
            LibCell::Not => Some(1),
            LibCell::Nand(n) => Some(n),
            LibCell::Or2 => Some(2),
            LibCell::SrLatch => Some(4),
            LibCell::TffStruct => Some(10),
            LibCell::TffBehav | LibCell::JkffBehav => None,
        }
    }

    /// Gate-level body of a composite cell, or `None` for primitives.
    pub fn gate_body(self, params: &BTreeMap<String, String>) -> Option<Cell> {
        let ports = self.ports();
        let mut cell = Cell {
            name: self.name(),
            ports,
            nets: Vec::new(),
            components: Vec::new(),
        };
        match self {
            LibCell::SrLatch => {
                cell.components = vec![
                    Component::instance("g1", "NAND2", &[("a1", "nS"), ("a2", "Qbar"), ("y", "Q")]),
                    Component::instance("g2", "NAND2", &[("a1", "nR"), ("a2", "Q"), ("y", "Qbar")]),
                ];
            }
            LibCell::TffStruct => {
                let feedback = match params.get("feedback").map(String::as_str) {
                    Some("same") => Feedback::Same,
                    _ => Feedback::Cross,
                };
                let (fb_s, fb_r) = match feedback {
                    Feedback::Cross => ("Qbar", "Q"),
                    Feedback::Same => ("Q", "Qbar"),
                };
                cell.nets = vec!["nS".into(), "nR".into()];
                cell.components = vec![
                    Component::instance(
                        "nand_s",
                        "NAND3",
                        &[("a1", "T"), ("a2", "CLK"), ("a3", fb_s), ("y", "nS")],
                    ),
                    Component::instance(
                        "nand_r",
                        "NAND3",
                        &[("a1", "T"), ("a2", "CLK"), ("a3", fb_r), ("y", "nR")],
                    ),
                    Component::instance(
                        "latch",
                        "SR_LATCH",
                        &[("nS", "nS"), ("nR", "nR"), ("Q", "Q"), ("Qbar", "Qbar")],
                    ),
                ];
            }
            _ => return None,
        }
        Some(cell)
    }

    /// Valve-level body of a primitive gate, or `None` if the cell is not a
    /// valve-expandable primitive.
    pub fn valve_body(self) -> Option<Cell> {
        let mut cell = Cell {
            name: self.name(),
            ports: self.ports(),
            nets: Vec::new(),
            components: Vec::new(),
        };
        match self {
            LibCell::Not => {
                cell.components = vec![
                    Component::restriction("pull", VAC, "y", Magnitude::Default),
                    Component::valve("sw", "a", "y", ATM),
                ];
            }
            LibCell::Nand(n) => {
                cell.components
                    .push(Component::restriction("pull", VAC, "y", Magnitude::Default));
                let mut upper = "y".to_string();
                for i in 1..=n {
                    let lower = if i == n { ATM.to_string() } else { format!("s{i}") };
                    if i < n {
                        cell.nets.push(lower.clone());
                    }
                    cell.components.push(Component::valve(
                        &format!("sw{i}"),
                        &format!("a{i}"),
                        &upper,
                        &lower,
                    ));
                    upper = lower;
                }
            }
            LibCell::Or2 => {
                cell.components = vec![
                    Component::valve("sw1", "a1", VAC, "y"),
                    Component::valve("sw2", "a2", VAC, "y"),
                    Component::restriction("vent", "y", ATM, Magnitude::Default),
                ];
            }
            _ => return None,
        }
        Some(cell)
    }
}

impl fmt::Display for LibCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_round_trips_names() {
        for cell in [
            LibCell::Not,
            LibCell::Nand(2),
            LibCell::Nand(3),
            LibCell::Nand(8),
            LibCell::Or2,
            LibCell::SrLatch,
            LibCell::TffStruct,
            LibCell::TffBehav,
            LibCell::JkffBehav,
        ] {
            assert_eq!(LibCell::lookup(&cell.name()), Some(cell));
        }
        assert_eq!(LibCell::lookup("NAND1"), None);
        assert_eq!(LibCell::lookup("NAND9"), None);
        assert_eq!(LibCell::lookup("NAND03"), None);
        assert_eq!(LibCell::lookup("nand2"), None);
    }

    #[test]
    fn not_body_is_one_valve_one_pull() {
        let body = LibCell::Not.valve_body().unwrap();
        assert_eq!(body.count_valves(), 1);
        assert_eq!(body.count_restrictions(), 1);
    }

    #[test]
    fn nand_stack_is_series() {
        let body = LibCell::Nand(3).valve_body().unwrap();
        assert_eq!(body.count_valves(), 3);
        assert_eq!(body.count_restrictions(), 1);
        assert_eq!(body.nets, vec!["s1", "s2"]);
        let flows: Vec<(String, String)> = body
            .components
            .iter()
            .filter_map(|c| match &c.kind {
                super::super::ComponentKind::Valve { port_a, port_b, .. } => {
                    Some((port_a.clone(), port_b.clone()))
                }
                _ => None,
            })
            .collect();
        assert_eq!(
            flows,
            vec![
                ("y".to_string(), "s1".to_string()),
                ("s1".to_string(), "s2".to_string()),
                ("s2".to_string(), "ATM".to_string())
            ]
        );
    }

    #[test]
    fn tff_feedback_assignment() {
        let body = LibCell::TffStruct.gate_body(&BTreeMap::new()).unwrap();
        let nand_s = body.find_component("nand_s").unwrap();
        match &nand_s.kind {
            super::super::ComponentKind::Instance { ports, .. } => {
                assert_eq!(ports["a3"], "Qbar");
                assert_eq!(ports["y"], "nS");
            }
            _ => panic!("expected instance"),
        }
    }
}
