use std::collections::HashMap;

use super::{is_rail, validate, Cell, Component, ComponentKind, Diagnostic, LibCell, Netlist};

/// How far [`flatten`] elaborates library cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    /// NOT, NAND_n, OR2 and behavioral flip-flops stay as atomic instances;
    /// SR latches and structural flip-flops become gates.
    Gate,
    /// Everything becomes valves, restrictions and passive elements.
    Valve,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlattenError {
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("cannot expand behavioral flip-flop `{instance}` ({cell}) to valves")]
    BehavioralAtValveLevel { instance: String, cell: String },
    #[error("netlist is not valid: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
}

struct Builder {
    depth: Depth,
    nets: Vec<String>,
    components: Vec<Component>,
}

/// Elaborates `top` into a single-cell netlist. Hierarchical net and
/// component names are joined with `.`; rails stay global; the top cell's
/// ports are preserved in order.
pub fn flatten(netlist: &Netlist, top: &str, depth: Depth) -> Result<Netlist, FlattenError> {
    let diags = validate(netlist);
    if !diags.is_empty() {
        return Err(FlattenError::Invalid(diags));
    }
    let top_cell = netlist
        .cells
        .get(top)
        .ok_or_else(|| FlattenError::UnknownCell(top.to_string()))?;

    let mut builder = Builder {
        depth,
        nets: Vec::new(),
        components: Vec::new(),
    };
    let identity: HashMap<String, String> = top_cell
        .port_names()
        .map(|p| (p.to_string(), p.to_string()))
        .collect();
    builder.expand(netlist, top_cell, "", &identity)?;

    let flat = Cell {
        name: top_cell.name.clone(),
        ports: top_cell.ports.clone(),
        nets: builder.nets,
        components: builder.components,
    };
    Ok(Netlist {
        top: Some(flat.name.clone()),
        cells: [(flat.name.clone(), flat)].into_iter().collect(),
        spans: Default::default(),
    })
}

impl Builder {
    fn expand(
        &mut self,
        netlist: &Netlist,
        cell: &Cell,
        prefix: &str,
        port_map: &HashMap<String, String>,
    ) -> Result<(), FlattenError> {
        let resolve = |net: &str| -> String {
            if is_rail(net) {
                net.to_string()
            } else if let Some(actual) = port_map.get(net) {
                actual.clone()
            } else {
                format!("{prefix}{net}")
            }
        };
        for n in &cell.nets {
            let mapped = resolve(n);
            if !self.nets.contains(&mapped) {
                self.nets.push(mapped);
            }
        }

        for comp in &cell.components {
            let name = format!("{prefix}{}", comp.name);
            let ComponentKind::Instance {
                cell: target,
                params,
                ports,
            } = &comp.kind
            else {
                self.components.push(Component {
                    name,
                    kind: comp.kind.map_nets(resolve),
                    layer: comp.layer,
                });
                continue;
            };

            let inner_map: HashMap<String, String> = ports
                .iter()
                .map(|(formal, actual)| (formal.clone(), resolve(actual)))
                .collect();
            let inner_prefix = format!("{name}.");

            if let Some(def) = netlist.cells.get(target) {
                self.expand(netlist, def, &inner_prefix, &inner_map)?;
                continue;
            }
            let lib = LibCell::lookup(target)
                .ok_or_else(|| FlattenError::UnknownCell(target.clone()))?;

            if let Some(body) = lib.gate_body(params) {
                self.expand(netlist, &body, &inner_prefix, &inner_map)?;
                continue;
            }
            match self.depth {
                Depth::Gate => {
                    self.components.push(Component {
                        name,
                        kind: comp.kind.map_nets(resolve),
                        layer: comp.layer,
                    });
                }
                Depth::Valve => {
                    let body = lib.valve_body().ok_or_else(|| {
                        FlattenError::BehavioralAtValveLevel {
                            instance: name.clone(),
                            cell: target.clone(),
                        }
                    })?;
                    self.expand(netlist, &body, &inner_prefix, &inner_map)?;
                }
            }
        }
        Ok(())
    }
}
