use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{is_rail, Cell, ComponentKind, LibCell, Magnitude, Netlist};
use crate::span::SourceSpan;

/// A single well-formedness problem, located by `cell/component` path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub reason: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}: {}", self.path, self.reason)
    }
}

struct Sink<'a> {
    netlist: &'a Netlist,
    out: Vec<Diagnostic>,
}

impl Sink<'_> {
    fn cell(&mut self, cell: &str, reason: String) {
        let span = self.netlist.spans.cell(cell).cloned();
        self.out.push(Diagnostic {
            path: cell.to_string(),
            reason,
            span,
        });
    }

    fn item(&mut self, cell: &str, item: &str, reason: String) {
        let span = self
            .netlist
            .spans
            .item(cell, item)
            .or_else(|| self.netlist.spans.cell(cell))
            .cloned();
        self.out.push(Diagnostic {
            path: format!("{cell}/{item}"),
            reason,
            span,
        });
    }
}

/// Checks every structural invariant of the netlist. An empty result means
/// the netlist is well formed.
pub fn validate(netlist: &Netlist) -> Vec<Diagnostic> {
    let mut sink = Sink {
        netlist,
        out: Vec::new(),
    };
    if let Some(top) = &netlist.top {
        if !netlist.cells.contains_key(top) {
            sink.out.push(Diagnostic {
                path: top.clone(),
                reason: format!("top cell `{top}` is not defined"),
                span: None,
            });
        }
    }
    for cell in netlist.cells.values() {
        check_cell(netlist, cell, &mut sink);
    }
    check_acyclic(netlist, &mut sink);
    sink.out
}

fn check_cell(netlist: &Netlist, cell: &Cell, sink: &mut Sink<'_>) {
    let name = cell.name.as_str();
    if LibCell::lookup(name).is_some() {
        sink.cell(name, format!("cell name `{name}` shadows a library cell"));
    }

    let mut seen_ports = HashSet::new();
    for p in &cell.ports {
        if !seen_ports.insert(p.name.as_str()) {
            if is_rail(&p.name) {
                sink.cell(name, format!("rail `{}` bound more than once", p.name));
            } else {
                sink.cell(name, format!("duplicate port `{}`", p.name));
            }
        }
    }

    let mut seen_nets = HashSet::new();
    for n in &cell.nets {
        if is_rail(n) {
            sink.item(name, n, format!("rail `{n}` cannot be declared as an internal net"));
        } else if seen_ports.contains(n.as_str()) {
            sink.item(name, n, format!("net `{n}` is already a port"));
        } else if !seen_nets.insert(n.as_str()) {
            sink.item(name, n, format!("duplicate net `{n}`"));
        }
    }

    let mut seen_components = HashSet::new();
    let mut touched: HashSet<&str> = HashSet::new();
    for c in &cell.components {
        if !seen_components.insert(c.name.as_str()) {
            sink.item(name, &c.name, format!("duplicate component name `{}`", c.name));
        }
        touched.extend(c.kind.nets());
        check_component(netlist, name, &c.name, &c.kind, sink);
    }

    for n in &cell.nets {
        if !touched.contains(n.as_str()) {
            sink.item(name, n, format!("dangling net `{n}` touches no component"));
        }
    }
}

fn positive(m: Magnitude) -> bool {
    match m {
        Magnitude::Default => true,
        Magnitude::Fixed(v) => v.is_finite() && v > 0.0,
    }
}

fn check_component(
    netlist: &Netlist,
    cell: &str,
    comp: &str,
    kind: &ComponentKind,
    sink: &mut Sink<'_>,
) {
    match kind {
        ComponentKind::Valve {
            gate,
            port_a,
            port_b,
        } => {
            if gate == port_a || gate == port_b {
                sink.item(cell, comp, "gate net equals flow port".into());
            }
        }
        ComponentKind::Restriction { resistance, .. } => {
            if !positive(*resistance) {
                sink.item(cell, comp, "resistance must be positive".into());
            }
        }
        ComponentKind::Chamber { capacitance, .. } => {
            if !positive(*capacitance) {
                sink.item(cell, comp, "capacitance must be positive".into());
            }
        }
        ComponentKind::Actuator {
            capacitance,
            engage_threshold,
            ..
        } => {
            if !positive(*capacitance) {
                sink.item(cell, comp, "capacitance must be positive".into());
            }
            if let Magnitude::Fixed(p) = engage_threshold {
                if !p.is_finite() || *p >= 0.0 {
                    sink.item(cell, comp, "engage threshold must be below atmosphere".into());
                }
            }
        }
        ComponentKind::Junction { inputs, output } => {
            if inputs.is_empty() {
                sink.item(cell, comp, "junction has no inputs".into());
            }
            if inputs.contains(output) {
                sink.item(cell, comp, "junction output is also an input".into());
            }
            if is_rail(output) {
                sink.item(cell, comp, format!("junction drives rail `{output}`"));
            }
        }
        ComponentKind::Instance {
            cell: target,
            params,
            ports,
        } => {
            let formals: Vec<String> = if let Some(lib) = LibCell::lookup(target) {
                for (k, v) in params {
                    if let Err(reason) = lib.check_param(k, v) {
                        sink.item(cell, comp, reason);
                    }
                }
                lib.ports().into_iter().map(|p| p.name).collect()
            } else if let Some(def) = netlist.cells.get(target) {
                if !params.is_empty() {
                    sink.item(cell, comp, format!("user cell `{target}` takes no parameters"));
                }
                def.ports.iter().map(|p| p.name.clone()).collect()
            } else {
                sink.item(cell, comp, format!("unknown cell `{target}`"));
                return;
            };
            for formal in &formals {
                if !ports.contains_key(formal) {
                    sink.item(cell, comp, format!("unbound formal port `{formal}` of `{target}`"));
                }
            }
            for formal in ports.keys() {
                if !formals.contains(formal) {
                    sink.item(cell, comp, format!("`{target}` has no port `{formal}`"));
                }
            }
        }
    }
}

fn check_acyclic(netlist: &Netlist, sink: &mut Sink<'_>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        netlist: &'a Netlist,
        name: &'a str,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
        cycles: &mut Vec<Vec<String>>,
    ) {
        match marks.get(name) {
            Some(Mark::Done) => return,
            Some(Mark::Active) => {
                let start = stack.iter().position(|s| *s == name).unwrap_or(0);
                let mut cyc: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                cyc.push(name.to_string());
                cycles.push(cyc);
                return;
            }
            None => {}
        }
        let Some(cell) = netlist.cells.get(name) else {
            return;
        };
        marks.insert(name, Mark::Active);
        stack.push(name);
        for (_, target) in cell.instances() {
            if netlist.cells.contains_key(target) {
                visit(netlist, target, marks, stack, cycles);
            }
        }
        stack.pop();
        marks.insert(name, Mark::Done);
    }

    let mut marks = HashMap::new();
    let mut cycles = Vec::new();
    for name in netlist.cells.keys() {
        visit(netlist, name, &mut marks, &mut Vec::new(), &mut cycles);
    }
    for cyc in cycles {
        let first = cyc[0].clone();
        sink.cell(&first, format!("recursive instantiation: {}", cyc.join(" -> ")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Cell, Component, Direction, Magnitude, ATM, VAC};

    fn not_cell() -> Cell {
        Cell::new("inv")
            .port("a", Direction::In)
            .port("y", Direction::Out)
            .component(Component::restriction("pull", VAC, "y", Magnitude::Fixed(1e9)))
            .component(Component::valve("sw", "a", "y", ATM))
    }

    #[test]
    fn well_formed_not_cell_is_clean() {
        let n = Netlist::new().with_cell(not_cell());
        assert!(validate(&n).is_empty());
    }

    #[test]
    fn library_valve_bodies_are_clean() {
        for lib in [LibCell::Not, LibCell::Nand(2), LibCell::Nand(3), LibCell::Or2] {
            let n = Netlist::new().with_cell(Cell {
                name: "c".into(),
                ..lib.valve_body().unwrap()
            });
            assert!(validate(&n).is_empty(), "{lib}");
        }
    }

    #[test]
    fn gate_equal_to_flow_port() {
        let cell = Cell::new("bad")
            .port("a", Direction::In)
            .component(Component::valve("v1", "a", "a", ATM));
        let d = validate(&Netlist::new().with_cell(cell));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].reason, "gate net equals flow port");
        assert_eq!(d[0].path, "bad/v1");
    }

    #[test]
    fn missing_port_binding_names_the_formal() {
        let cell = Cell::new("top")
            .port("x", Direction::In)
            .port("y", Direction::Out)
            .component(Component::instance("u1", "NOT", &[("a", "x")]));
        let d = validate(&Netlist::new().with_cell(cell));
        assert_eq!(d.len(), 1);
        assert!(d[0].reason.contains("`y`"), "{}", d[0].reason);
    }

    #[test]
    fn dangling_and_duplicate_nets() {
        let cell = not_cell().net("unused").net("unused");
        let d = validate(&Netlist::new().with_cell(cell));
        assert!(d.iter().any(|d| d.reason.contains("duplicate net")));
        assert!(d.iter().any(|d| d.reason.contains("dangling net `unused`")));
    }

    #[test]
    fn rails_cannot_be_internal_or_repeated() {
        let cell = not_cell()
            .net(VAC)
            .port(ATM, Direction::Inout)
            .port(ATM, Direction::Inout);
        let d = validate(&Netlist::new().with_cell(cell));
        assert!(d.iter().any(|d| d.reason.contains("internal net")));
        assert!(d.iter().any(|d| d.reason.contains("bound more than once")));
    }

    #[test]
    fn recursive_instantiation_detected() {
        let a = Cell::new("a")
            .port("p", Direction::In)
            .component(Component::instance("ub", "b", &[("p", "p")]));
        let b = Cell::new("b")
            .port("p", Direction::In)
            .component(Component::instance("ua", "a", &[("p", "p")]));
        let d = validate(&Netlist::new().with_cell(a).with_cell(b));
        assert!(d.iter().any(|d| d.reason.contains("recursive")));
    }

    #[test]
    fn bad_magnitudes_and_params() {
        let cell = Cell::new("c")
            .port("x", Direction::In)
            .component(Component::restriction("r", "x", ATM, Magnitude::Fixed(0.0)))
            .component(
                Component::instance(
                    "ff",
                    "TFF_BEHAV",
                    &[("T", "x"), ("CLK", "x"), ("Q", "q"), ("Qbar", "qb")],
                )
                .with_param("edge", "sideways"),
            );
        let d = validate(&Netlist::new().with_cell(cell));
        assert!(d.iter().any(|d| d.reason.contains("resistance")));
        assert!(d.iter().any(|d| d.reason.contains("sideways")));
    }

    #[test]
    fn unknown_cell() {
        let cell = Cell::new("c").component(Component::instance("u", "FOO", &[]));
        let d = validate(&Netlist::new().with_cell(cell));
        assert_eq!(d[0].reason, "unknown cell `FOO`");
    }
}
