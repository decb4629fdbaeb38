//! Hierarchical circuit model for vacuum-driven fluidic logic.
//!
//! A [`Netlist`] is a set of [`Cell`]s. Each cell has an ordered port list,
//! internal nets, and [`Component`]s: normally-closed membrane valves, flow
//! restrictions, chambers, actuators, routing junctions, and instances of
//! other cells. The built-in cell library lives in [`library`]; [`flatten`]
//! elaborates a hierarchy down to gate or valve level.
//!
//! Two net names are reserved and implicitly declared everywhere: [`VAC`],
//! the vacuum power rail, and [`ATM`], the atmospheric vent that acts as the
//! active ground.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::span::SourceSpan;

mod flatten;
pub mod library;
mod validate;

pub use flatten::{flatten, Depth, FlattenError};
pub use library::{EdgeMode, Feedback, LibCell, MAX_NAND_INPUTS};
pub use validate::{validate, Diagnostic};

/// Vacuum supply rail.
pub const VAC: &str = "VAC";
/// Atmospheric vent rail.
pub const ATM: &str = "ATM";

pub fn is_rail(net: &str) -> bool {
    net == VAC || net == ATM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::Inout => "inout",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "in" => Some(Direction::In),
            "out" => Some(Direction::Out),
            "inout" => Some(Direction::Inout),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub dir: Direction,
}

impl Port {
    pub fn new(name: &str, dir: Direction) -> Self {
        Self {
            name: name.to_string(),
            dir,
        }
    }
}

/// A physical quantity that is either fixed in the netlist or taken from the
/// analog parameter set at simulation time (pull resistance, actuator
/// capacitance, and so on).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    #[default]
    Default,
    Fixed(f64),
}

impl Magnitude {
    pub fn resolve(self, default: f64) -> f64 {
        match self {
            Magnitude::Default => default,
            Magnitude::Fixed(v) => v,
        }
    }

    pub fn fixed(self) -> Option<f64> {
        match self {
            Magnitude::Default => None,
            Magnitude::Fixed(v) => Some(v),
        }
    }
}

/// Fabrication layer a component belongs to. Metadata only; no geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Flow,
    Control,
    Routing,
}

impl Layer {
    pub fn keyword(self) -> &'static str {
        match self {
            Layer::Flow => "flow",
            Layer::Control => "control",
            Layer::Routing => "routing",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "flow" => Some(Layer::Flow),
            "control" => Some(Layer::Control),
            "routing" => Some(Layer::Routing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentKind {
    /// Normally-closed membrane valve. Vacuum on `gate` opens the flow path
    /// between `port_a` and `port_b`.
    Valve {
        gate: String,
        port_a: String,
        port_b: String,
    },
    /// Fixed flow resistance in Pa·s/m³.
    Restriction {
        port_a: String,
        port_b: String,
        resistance: Magnitude,
    },
    /// Lumped pneumatic capacitance in m³/Pa.
    Chamber { node: String, capacitance: Magnitude },
    /// Vacuum actuator load; engaged when its node is at or below
    /// `engage_threshold` (Pa gauge).
    Actuator {
        node: String,
        capacitance: Magnitude,
        engage_threshold: Magnitude,
    },
    /// Lossless routing-layer merge: the output carries vacuum when any input
    /// does. A single input makes it a plain wire.
    Junction { inputs: Vec<String>, output: String },
    /// Instance of a library or user cell. `ports` maps formal port names to
    /// nets in the enclosing cell.
    Instance {
        cell: String,
        params: BTreeMap<String, String>,
        ports: IndexMap<String, String>,
    },
}

impl ComponentKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ComponentKind::Valve { .. } => "valve",
            ComponentKind::Restriction { .. } => "rest",
            ComponentKind::Chamber { .. } => "chamber",
            ComponentKind::Actuator { .. } => "act",
            ComponentKind::Junction { .. } => "junction",
            ComponentKind::Instance { .. } => "inst",
        }
    }

    pub fn default_layer(&self) -> Layer {
        match self {
            ComponentKind::Valve { .. } | ComponentKind::Instance { .. } => Layer::Control,
            ComponentKind::Restriction { .. } | ComponentKind::Chamber { .. } => Layer::Flow,
            ComponentKind::Actuator { .. } | ComponentKind::Junction { .. } => Layer::Routing,
        }
    }

    /// Every net this component touches, in a fixed order.
    pub fn nets(&self) -> Vec<&str> {
        match self {
            ComponentKind::Valve {
                gate,
                port_a,
                port_b,
            } => vec![gate, port_a, port_b],
            ComponentKind::Restriction { port_a, port_b, .. } => vec![port_a, port_b],
            ComponentKind::Chamber { node, .. } | ComponentKind::Actuator { node, .. } => {
                vec![node]
            }
            ComponentKind::Junction { inputs, output } => {
                let mut v: Vec<&str> = inputs.iter().map(String::as_str).collect();
                v.push(output);
                v
            }
            ComponentKind::Instance { ports, .. } => ports.values().map(String::as_str).collect(),
        }
    }

    /// Rewrites every net reference through `f`.
    pub fn map_nets(&self, mut f: impl FnMut(&str) -> String) -> ComponentKind {
        match self {
            ComponentKind::Valve {
                gate,
                port_a,
                port_b,
            } => ComponentKind::Valve {
                gate: f(gate),
                port_a: f(port_a),
                port_b: f(port_b),
            },
            ComponentKind::Restriction {
                port_a,
                port_b,
                resistance,
            } => ComponentKind::Restriction {
                port_a: f(port_a),
                port_b: f(port_b),
                resistance: *resistance,
            },
            ComponentKind::Chamber { node, capacitance } => ComponentKind::Chamber {
                node: f(node),
                capacitance: *capacitance,
            },
            ComponentKind::Actuator {
                node,
                capacitance,
                engage_threshold,
            } => ComponentKind::Actuator {
                node: f(node),
                capacitance: *capacitance,
                engage_threshold: *engage_threshold,
            },
            ComponentKind::Junction { inputs, output } => ComponentKind::Junction {
                inputs: inputs.iter().map(|n| f(n)).collect(),
                output: f(output),
            },
            ComponentKind::Instance {
                cell,
                params,
                ports,
            } => ComponentKind::Instance {
                cell: cell.clone(),
                params: params.clone(),
                ports: ports.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    #[serde(flatten)]
    pub kind: ComponentKind,
    pub layer: Layer,
}

impl Component {
    /// Creates a component on its default layer.
    pub fn new(name: impl Into<String>, kind: ComponentKind) -> Self {
        let layer = kind.default_layer();
        Self {
            name: name.into(),
            kind,
            layer,
        }
    }

    pub fn valve(name: &str, gate: &str, a: &str, b: &str) -> Self {
        Self::new(
            name,
            ComponentKind::Valve {
                gate: gate.into(),
                port_a: a.into(),
                port_b: b.into(),
            },
        )
    }

    pub fn restriction(name: &str, a: &str, b: &str, resistance: Magnitude) -> Self {
        Self::new(
            name,
            ComponentKind::Restriction {
                port_a: a.into(),
                port_b: b.into(),
                resistance,
            },
        )
    }

    pub fn actuator(name: &str, node: &str) -> Self {
        Self::new(
            name,
            ComponentKind::Actuator {
                node: node.into(),
                capacitance: Magnitude::Default,
                engage_threshold: Magnitude::Default,
            },
        )
    }

    pub fn junction(name: &str, inputs: &[&str], output: &str) -> Self {
        Self::new(
            name,
            ComponentKind::Junction {
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                output: output.into(),
            },
        )
    }

    /// Instance with port bindings given as `(formal, actual)` pairs.
    pub fn instance(name: &str, cell: &str, ports: &[(&str, &str)]) -> Self {
        Self::new(
            name,
            ComponentKind::Instance {
                cell: cell.into(),
                params: BTreeMap::new(),
                ports: ports
                    .iter()
                    .map(|(f, a)| (f.to_string(), a.to_string()))
                    .collect(),
            },
        )
    }

    pub fn with_param(mut self, key: &str, value: &str) -> Self {
        if let ComponentKind::Instance { params, .. } = &mut self.kind {
            params.insert(key.to_string(), value.to_string());
        }
        self
    }

    pub fn with_layer(mut self, layer: Layer) -> Self {
        self.layer = layer;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub ports: Vec<Port>,
    /// Internal nets. Ports and rails are not listed here.
    pub nets: Vec<String>,
    pub components: Vec<Component>,
}

impl Cell {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ports: Vec::new(),
            nets: Vec::new(),
            components: Vec::new(),
        }
    }

    pub fn port(mut self, name: &str, dir: Direction) -> Self {
        self.ports.push(Port::new(name, dir));
        self
    }

    pub fn net(mut self, name: &str) -> Self {
        self.nets.push(name.to_string());
        self
    }

    pub fn component(mut self, c: Component) -> Self {
        self.components.push(c);
        self
    }

    pub fn port_names(&self) -> impl Iterator<Item = &str> {
        self.ports.iter().map(|p| p.name.as_str())
    }

    pub fn find_port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn find_component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Adds every net referenced by a component that is neither a port, a
    /// rail, nor already declared. Order of first use.
    pub fn declare_used_nets(&mut self) {
        let mut extra = Vec::new();
        for c in &self.components {
            for n in c.kind.nets() {
                if !is_rail(n)
                    && self.find_port(n).is_none()
                    && !self.nets.iter().any(|m| m == n)
                    && !extra.iter().any(|m: &String| m == n)
                {
                    extra.push(n.to_string());
                }
            }
        }
        self.nets.extend(extra);
    }

    pub fn count_valves(&self) -> usize {
        self.components
            .iter()
            .filter(|c| matches!(c.kind, ComponentKind::Valve { .. }))
            .count()
    }

    pub fn count_restrictions(&self) -> usize {
        self.components
            .iter()
            .filter(|c| matches!(c.kind, ComponentKind::Restriction { .. }))
            .count()
    }

    pub fn instances(&self) -> impl Iterator<Item = (&Component, &str)> {
        self.components.iter().filter_map(|c| match &c.kind {
            ComponentKind::Instance { cell, .. } => Some((c, cell.as_str())),
            _ => None,
        })
    }

    /// Same cell with components and internal nets in canonical (sorted)
    /// order. Port order is significant and kept.
    pub fn canonical(&self) -> Cell {
        let mut c = self.clone();
        c.components.sort_by(|a, b| a.name.cmp(&b.name));
        c.nets.sort();
        c
    }
}

/// A collection of cells plus an optional designated top cell.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Netlist {
    pub cells: IndexMap<String, Cell>,
    pub top: Option<String>,
    #[serde(skip)]
    pub spans: SpanTable,
}

/// Source locations recorded by the parser, keyed by cell and component
/// name. Not part of structural equality.
#[derive(Debug, Clone, Default)]
pub struct SpanTable {
    cells: HashMap<String, SourceSpan>,
    items: HashMap<(String, String), SourceSpan>,
}

impl SpanTable {
    pub fn set_cell(&mut self, cell: &str, span: SourceSpan) {
        self.cells.insert(cell.to_string(), span);
    }

    pub fn set_item(&mut self, cell: &str, item: &str, span: SourceSpan) {
        self.items
            .insert((cell.to_string(), item.to_string()), span);
    }

    pub fn cell(&self, cell: &str) -> Option<&SourceSpan> {
        self.cells.get(cell)
    }

    pub fn item(&self, cell: &str, item: &str) -> Option<&SourceSpan> {
        self.items.get(&(cell.to_string(), item.to_string()))
    }
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells && self.top == other.top
    }
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cell(mut self, cell: Cell) -> Self {
        self.add_cell(cell);
        self
    }

    pub fn add_cell(&mut self, cell: Cell) {
        self.cells.insert(cell.name.clone(), cell);
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.get(name)
    }

    /// The designated top cell, or else the last cell that no other cell
    /// instantiates.
    pub fn top_cell(&self) -> Option<&Cell> {
        if let Some(t) = &self.top {
            return self.cells.get(t);
        }
        let used: Vec<&str> = self
            .cells
            .values()
            .flat_map(|c| c.instances().map(|(_, cell)| cell))
            .collect();
        self.cells
            .values().rfind(|c| !used.contains(&c.name.as_str()))
    }

    /// Copy with every cell in canonical order, for structural comparison.
    pub fn canonical(&self) -> Netlist {
        let mut cells: Vec<Cell> = self.cells.values().map(Cell::canonical).collect();
        cells.sort_by(|a, b| a.name.cmp(&b.name));
        Netlist {
            cells: cells.into_iter().map(|c| (c.name.clone(), c)).collect(),
            top: self.top.clone(),
            spans: SpanTable::default(),
        }
    }

    /// Equality up to component and net ordering.
    pub fn structurally_eq(&self, other: &Netlist) -> bool {
        self.canonical() == other.canonical()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CountError {
    #[error("netlist is not flattened to valve level: {0}")]
    NotFlattened(String),
}

/// Number of valves in a valve-level flattened netlist.
pub fn valve_count(netlist: &Netlist) -> Result<usize, CountError> {
    if netlist.cells.len() != 1 {
        return Err(CountError::NotFlattened(format!(
            "expected exactly one cell, found {}",
            netlist.cells.len()
        )));
    }
    let cell = &netlist.cells[0];
    if let Some((c, _)) = cell.instances().next() {
        return Err(CountError::NotFlattened(format!(
            "instance `{}` remains in `{}`",
            c.name, cell.name
        )));
    }
    Ok(cell.count_valves())
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::fnl::serialize_fnl(self))
    }
}
