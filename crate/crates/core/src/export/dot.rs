use std::collections::BTreeMap;
use std::fmt::Write;

use crate::netlist::{Cell, ComponentKind, Layer, Netlist};

/// Identifiers never contain backslashes, so `\n` in labels stays a DOT
/// line break.
fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

fn shape(kind: &ComponentKind) -> &'static str {
    match kind {
        ComponentKind::Valve { .. } => "diamond",
        ComponentKind::Restriction { .. } => "box",
        ComponentKind::Chamber { .. } => "cylinder",
        ComponentKind::Actuator { .. } => "doublecircle",
        ComponentKind::Junction { .. } => "invtriangle",
        ComponentKind::Instance { .. } => "component",
    }
}

fn color(layer: Layer) -> &'static str {
    match layer {
        Layer::Flow => "steelblue",
        Layer::Control => "firebrick",
        Layer::Routing => "darkgreen",
    }
}

fn label(kind: &ComponentKind) -> String {
    match kind {
        ComponentKind::Instance { cell, .. } => cell.clone(),
        k => k.keyword().to_string(),
    }
}

/// Top cell as a graph. Components are nodes; a net touching exactly two
/// component pins is an edge between them, any other net is a point node
/// wired to each pin.
pub fn write_dot(netlist: &Netlist) -> String {
    match netlist.top_cell() {
        Some(cell) => cell_dot(cell),
        None => "digraph {\n}\n".to_string(),
    }
}

pub fn cell_dot(cell: &Cell) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&cell.name));
    out.push_str("  rankdir=LR;\n");
    let mut pins: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in &cell.components {
        let _ = writeln!(
            out,
            "  {} [label={}, shape={}, color={}];",
            quote(&format!("c:{}", c.name)),
            quote(&format!("{}\\n{}", c.name, label(&c.kind))),
            shape(&c.kind),
            color(c.layer)
        );
        for n in c.kind.nets() {
            pins.entry(n).or_default().push(&c.name);
        }
    }
    for (net, on) in &pins {
        if on.len() == 2 {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(&format!("c:{}", on[0])),
                quote(&format!("c:{}", on[1])),
                quote(net)
            );
        } else {
            let id = quote(&format!("n:{net}"));
            let _ = writeln!(out, "  {id} [label={}, shape=point, xlabel={}];", quote(net), quote(net));
            for c in on {
                let _ = writeln!(out, "  {} -> {id};", quote(&format!("c:{c}")));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::LibCell;

    #[test]
    fn not_cell_graph() {
        let dot = cell_dot(&LibCell::Not.valve_body().unwrap());
        assert_eq!(dot.matches("shape=point").count(), 3);
        assert_eq!(dot.lines().filter(|l| l.contains("[label=\"") && l.contains("color=")).count(), 2);
    }

    #[test]
    fn empty_netlist() {
        assert_eq!(write_dot(&Netlist::new()), "digraph {\n}\n");
    }
}
