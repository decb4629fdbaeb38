//! Netlist language.
//!
//! ```text
//! cell inverter
//!   port in a
//!   port out y
//!   rest pull a=VAC b=y r=1e9
//!   valve sw gate=a a=y b=ATM
//! end
//! top inverter
//! ```
//!
//! Statements outside a `cell ... end` block belong to an implicit cell
//! named `main`. Nets are declared by use; `net` lines declare them
//! explicitly (and are reported if they end up unused).

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use indexmap::IndexMap;

use super::lexer::{tokenize, Cursor, Line, Tok};
use super::{eof_span, fmt_num, ParseError, ParseErrorKind};
use crate::netlist::{
    validate, Cell, Component, ComponentKind, Direction, Layer, LibCell, Magnitude, Netlist,
};
use crate::span::SourceSpan;

pub const IMPLICIT_CELL: &str = "main";

pub fn parse_fnl(text: &str) -> Result<Netlist, ParseError> {
    parse_fnl_named(text, "<input>")
}

pub fn parse_fnl_named(text: &str, file: &str) -> Result<Netlist, ParseError> {
    let lines = tokenize(text, file)?;
    let mut p = Parser {
        netlist: Netlist::new(),
        current: None,
        explicit_nets: HashSet::new(),
        instance_refs: Vec::new(),
    };
    for line in &lines {
        p.statement(line)?;
    }
    if let Some(open) = &p.current {
        let span = p
            .netlist
            .spans
            .cell(open)
            .cloned()
            .unwrap_or_else(|| eof_span(text, file));
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            span,
            format!("expected `end` to close cell `{open}`, found end of file"),
        ));
    }
    for (target, span) in &p.instance_refs {
        if LibCell::lookup(target).is_none() && !p.netlist.cells.contains_key(target) {
            return Err(ParseError::semantic(span, format!("unknown cell `{target}`")));
        }
    }
    if let Some(top) = &p.netlist.top {
        if !p.netlist.cells.contains_key(top) {
            let span = p.netlist.spans.cell(top).cloned().unwrap_or_else(|| eof_span(text, file));
            return Err(ParseError::semantic(&span, format!("top cell `{top}` is not defined")));
        }
    }
    for cell in p.netlist.cells.values_mut() {
        cell.declare_used_nets();
    }
    if let Some(d) = validate(&p.netlist).into_iter().next() {
        let span = d.span.clone().unwrap_or_else(|| eof_span(text, file));
        return Err(ParseError::semantic(&span, format!("{}: {}", d.path, d.reason)));
    }
    Ok(p.netlist)
}

struct Parser {
    netlist: Netlist,
    current: Option<String>,
    explicit_nets: HashSet<(String, String)>,
    instance_refs: Vec<(String, SourceSpan)>,
}

impl Parser {
    fn cell_mut(&mut self, span: &SourceSpan) -> &mut Cell {
        let name = match &self.current {
            Some(n) => n.clone(),
            None => {
                if !self.netlist.cells.contains_key(IMPLICIT_CELL) {
                    self.netlist.add_cell(Cell::new(IMPLICIT_CELL));
                    self.netlist.spans.set_cell(IMPLICIT_CELL, span.clone());
                }
                IMPLICIT_CELL.to_string()
            }
        };
        self.netlist.cells.get_mut(&name).expect("cell exists")
    }

    fn statement(&mut self, line: &Line) -> Result<(), ParseError> {
        let mut cur = Cursor::new(line);
        let (kw, kw_span) = cur.simple_ident("statement keyword")?;
        match kw {
            "cell" => {
                let (name, span) = cur.simple_ident("cell name")?;
                cur.expect_end()?;
                if let Some(open) = &self.current {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        kw_span.clone(),
                        format!("expected `end` to close cell `{open}` before a new cell"),
                    ));
                }
                if self.netlist.cells.contains_key(name) {
                    return Err(ParseError::semantic(span, format!("duplicate cell `{name}`")));
                }
                self.netlist.add_cell(Cell::new(name));
                self.netlist.spans.set_cell(name, line.span.clone());
                self.current = Some(name.to_string());
            }
            "end" => {
                cur.expect_end()?;
                if self.current.take().is_none() {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        kw_span.clone(),
                        "`end` without an open cell",
                    ));
                }
            }
            "top" => {
                let (name, _) = cur.simple_ident("top cell name")?;
                cur.expect_end()?;
                if self.netlist.top.is_some() {
                    return Err(ParseError::semantic(kw_span, "top cell declared twice"));
                }
                self.netlist.top = Some(name.to_string());
            }
            "port" => {
                let (dir_kw, dir_span) = cur.simple_ident("port direction (in, out, inout)")?;
                let dir = Direction::from_keyword(dir_kw).ok_or_else(|| {
                    ParseError::new(
                        ParseErrorKind::Syntax,
                        dir_span.clone(),
                        format!("expected port direction (in, out, inout), found `{dir_kw}`"),
                    )
                })?;
                let mut names = Vec::new();
                while !cur.at_end() {
                    let (n, span) = cur.simple_ident("port name")?;
                    names.push((n, span));
                }
                if names.is_empty() {
                    return Err(cur.error("port name"));
                }
                let cell = self.cell_mut(&line.span);
                for (n, span) in names {
                    if cell.find_port(n).is_some() {
                        return Err(ParseError::semantic(span, format!("duplicate port `{n}`")));
                    }
                    cell.ports.push(crate::netlist::Port::new(n, dir));
                }
            }
            "net" => {
                let mut names = Vec::new();
                while !cur.at_end() {
                    names.push(cur.ident("net name")?);
                }
                if names.is_empty() {
                    return Err(cur.error("net name"));
                }
                let cell_name = self.cell_mut(&line.span).name.clone();
                for (n, span) in names {
                    let key = (cell_name.clone(), n.to_string());
                    let cell = self.netlist.cells.get_mut(&cell_name).expect("cell");
                    if crate::netlist::is_rail(n) {
                        return Err(ParseError::semantic(
                            span,
                            format!("`{n}` is a reserved rail and is declared implicitly"),
                        ));
                    }
                    if cell.find_port(n).is_some() || !self.explicit_nets.insert(key) {
                        return Err(ParseError::semantic(span, format!("duplicate net `{n}`")));
                    }
                    cell.nets.push(n.to_string());
                    self.netlist.spans.set_item(&cell_name, n, span.clone());
                }
            }
            "valve" | "rest" | "chamber" | "act" | "junction" | "inst" => {
                let (name, name_span) = cur.ident("component name")?;
                let comp = self.component(kw, name, &mut cur)?;
                let cell_name = self.cell_mut(&line.span).name.clone();
                let cell = self.netlist.cells.get_mut(&cell_name).expect("cell");
                if cell.find_component(name).is_some() {
                    return Err(ParseError::semantic(
                        name_span,
                        format!("duplicate component `{name}`"),
                    ));
                }
                cell.components.push(comp);
                self.netlist.spans.set_item(&cell_name, name, line.span.clone());
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    kw_span.clone(),
                    format!(
                        "expected statement keyword (cell, end, top, port, net, valve, rest, \
                         chamber, act, junction, inst), found `{other}`"
                    ),
                ))
            }
        }
        Ok(())
    }

    fn component(
        &mut self,
        kw: &str,
        name: &str,
        cur: &mut Cursor<'_>,
    ) -> Result<Component, ParseError> {
        let mut inst_cell = None;
        let mut params = BTreeMap::new();
        if kw == "inst" {
            let (cell, span) = cur.simple_ident("cell name")?;
            inst_cell = Some(cell.to_string());
            self.instance_refs.push((cell.to_string(), span.clone()));
            if cur.eat(&Tok::LParen) {
                loop {
                    let (k, kspan) = cur.simple_ident("parameter name")?;
                    cur.expect(&Tok::Eq)?;
                    let v = match cur.next().map(|t| &t.tok) {
                        Some(Tok::Ident(s)) => s.clone(),
                        Some(Tok::Number { value, .. }) => fmt_num(*value),
                        _ => return Err(cur.error("parameter value")),
                    };
                    if params.insert(k.to_string(), v).is_some() {
                        return Err(ParseError::semantic(kspan, format!("duplicate parameter `{k}`")));
                    }
                    if cur.eat(&Tok::RParen) {
                        break;
                    }
                    cur.expect(&Tok::Comma)?;
                }
            }
        }

        // key=value pairs; values are net names, numbers, or comma lists.
        let mut nets: IndexMap<String, (Vec<String>, SourceSpan)> = IndexMap::new();
        let mut nums: IndexMap<String, (f64, SourceSpan)> = IndexMap::new();
        let mut layer = None;
        while !cur.at_end() {
            let (key, kspan) = cur.simple_ident("`key=value`")?;
            cur.expect(&Tok::Eq)?;
            if nets.contains_key(key) || nums.contains_key(key) || (key == "layer" && layer.is_some())
            {
                return Err(ParseError::semantic(kspan, format!("duplicate key `{key}`")));
            }
            if key == "layer" {
                let (l, lspan) = cur.simple_ident("layer (flow, control, routing)")?;
                layer = Some(Layer::from_keyword(l).ok_or_else(|| {
                    ParseError::new(
                        ParseErrorKind::Syntax,
                        lspan.clone(),
                        format!("expected layer (flow, control, routing), found `{l}`"),
                    )
                })?);
                continue;
            }
            match cur.peek().map(|t| &t.tok) {
                Some(Tok::Number { value, .. }) => {
                    let v = *value;
                    cur.next();
                    nums.insert(key.to_string(), (v, kspan.clone()));
                }
                Some(Tok::Ident(_)) => {
                    let mut list = vec![cur.ident("net name")?.0.to_string()];
                    while cur.eat(&Tok::Comma) {
                        list.push(cur.ident("net name")?.0.to_string());
                    }
                    nets.insert(key.to_string(), (list, kspan.clone()));
                }
                _ => return Err(cur.error("net name or number")),
            }
        }

        let stmt_span = cur.here();
        let mut take_net = |key: &str| -> Result<String, ParseError> {
            match nets.shift_remove(key) {
                Some((mut v, span)) => {
                    if v.len() != 1 {
                        return Err(ParseError::semantic(&span, format!("`{key}` takes a single net")));
                    }
                    Ok(v.remove(0))
                }
                None => Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    stmt_span.clone(),
                    format!("expected `{key}=<net>` in {kw} `{name}`"),
                )),
            }
        };

        let kind = match kw {
            "valve" => ComponentKind::Valve {
                gate: take_net("gate")?,
                port_a: take_net("a")?,
                port_b: take_net("b")?,
            },
            "rest" => ComponentKind::Restriction {
                port_a: take_net("a")?,
                port_b: take_net("b")?,
                resistance: magnitude(&mut nums, "r"),
            },
            "chamber" => ComponentKind::Chamber {
                node: take_net("node")?,
                capacitance: magnitude(&mut nums, "c"),
            },
            "act" => ComponentKind::Actuator {
                node: take_net("node")?,
                capacitance: magnitude(&mut nums, "c"),
                engage_threshold: magnitude(&mut nums, "p"),
            },
            "junction" => {
                let output = take_net("y")?;
                let inputs = match nets.shift_remove("in") {
                    Some((v, _)) => v,
                    None => {
                        return Err(ParseError::new(
                            ParseErrorKind::Syntax,
                            stmt_span.clone(),
                            format!("expected `in=<net>[,<net>...]` in junction `{name}`"),
                        ))
                    }
                };
                ComponentKind::Junction { inputs, output }
            }
            "inst" => {
                let mut ports = IndexMap::new();
                for (formal, (mut v, span)) in nets.drain(..) {
                    if v.len() != 1 {
                        return Err(ParseError::semantic(
                            &span,
                            format!("port `{formal}` takes a single net"),
                        ));
                    }
                    ports.insert(formal, v.remove(0));
                }
                ComponentKind::Instance {
                    cell: inst_cell.expect("parsed above"),
                    params,
                    ports,
                }
            }
            _ => unreachable!("keyword checked by caller"),
        };
        if let Some((key, (_, span))) = nets.into_iter().next() {
            return Err(ParseError::semantic(&span, format!("unexpected key `{key}` for {kw}")));
        }
        if let Some((key, (_, span))) = nums.into_iter().next() {
            return Err(ParseError::semantic(&span, format!("unexpected key `{key}` for {kw}")));
        }
        let mut comp = Component::new(name, kind);
        if let Some(l) = layer {
            comp.layer = l;
        }
        Ok(comp)
    }
}

fn magnitude(nums: &mut IndexMap<String, (f64, SourceSpan)>, key: &str) -> Magnitude {
    match nums.shift_remove(key) {
        Some((v, _)) => Magnitude::Fixed(v),
        None => Magnitude::Default,
    }
}

/// Canonical text: cells and components sorted by name, nets sorted, LF line
/// endings, shortest round-trip numbers.
pub fn serialize_fnl(netlist: &Netlist) -> String {
    let canon = netlist.canonical();
    let mut out = String::from("# fluidic netlist\n");
    for cell in canon.cells.values() {
        let mut cell = cell.clone();
        cell.declare_used_nets();
        cell.nets.sort();
        writeln!(out, "cell {}", cell.name).unwrap();
        for p in &cell.ports {
            writeln!(out, "  port {} {}", p.dir.keyword(), p.name).unwrap();
        }
        for n in &cell.nets {
            writeln!(out, "  net {n}").unwrap();
        }
        for c in &cell.components {
            writeln!(out, "  {}", component_line(c)).unwrap();
        }
        out.push_str("end\n");
    }
    if let Some(top) = &canon.top {
        writeln!(out, "top {top}").unwrap();
    }
    out
}

fn component_line(c: &Component) -> String {
    let mut s = format!("{} {}", c.kind.keyword(), c.name);
    let mag = |s: &mut String, key: &str, m: &Magnitude| {
        if let Magnitude::Fixed(v) = m {
            write!(s, " {key}={}", fmt_num(*v)).unwrap();
        }
    };
    match &c.kind {
        ComponentKind::Valve {
            gate,
            port_a,
            port_b,
        } => write!(s, " gate={gate} a={port_a} b={port_b}").unwrap(),
        ComponentKind::Restriction {
            port_a,
            port_b,
            resistance,
        } => {
            write!(s, " a={port_a} b={port_b}").unwrap();
            mag(&mut s, "r", resistance);
        }
        ComponentKind::Chamber { node, capacitance } => {
            write!(s, " node={node}").unwrap();
            mag(&mut s, "c", capacitance);
        }
        ComponentKind::Actuator {
            node,
            capacitance,
            engage_threshold,
        } => {
            write!(s, " node={node}").unwrap();
            mag(&mut s, "c", capacitance);
            mag(&mut s, "p", engage_threshold);
        }
        ComponentKind::Junction { inputs, output } => {
            write!(s, " y={output} in={}", inputs.join(",")).unwrap()
        }
        ComponentKind::Instance {
            cell,
            params,
            ports,
        } => {
            write!(s, " {cell}").unwrap();
            if !params.is_empty() {
                let ps: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(s, "({})", ps.join(",")).unwrap();
            }
            for (formal, actual) in ports {
                write!(s, " {formal}={actual}").unwrap();
            }
        }
    }
    if c.layer != c.kind.default_layer() {
        write!(s, " layer={}", c.layer.keyword()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{flatten, valve_count, Depth};

    #[test]
    fn canonical_inverter() {
        let n = parse_fnl("valve v1 gate=a a=y b=ATM\nrest r1 a=VAC b=y r=1e9\n").unwrap();
        let cell = &n.cells[IMPLICIT_CELL];
        assert_eq!(cell.count_valves(), 1);
        assert_eq!(cell.count_restrictions(), 1);
        assert_eq!(cell.nets, vec!["a", "y"]);
        match &cell.components[1].kind {
            ComponentKind::Restriction { resistance, .. } => {
                assert_eq!(*resistance, Magnitude::Fixed(1e9))
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_netlist() {
        let n = parse_fnl("").unwrap();
        assert!(n.cells.is_empty());
        assert_eq!(serialize_fnl(&n), "# fluidic netlist\n");
        assert!(parse_fnl("# nothing\n\n").unwrap().cells.is_empty());
    }

    #[test]
    fn gate_on_flow_port_is_semantic_error_with_line() {
        let e = parse_fnl("# c\nvalve v1 gate=a a=a b=ATM\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Semantic);
        assert_eq!(e.span.line, 2);
        assert!(e.message.contains("gate net equals flow port"));
    }

    #[test]
    fn error_kinds_are_distinct() {
        assert_eq!(parse_fnl("valve v1 gate=a a=$").unwrap_err().kind, ParseErrorKind::Lexical);
        assert_eq!(parse_fnl("valve v1 gate a").unwrap_err().kind, ParseErrorKind::Syntax);
        let e = parse_fnl("net n\nnet n\nrest r a=n b=VAC").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Semantic);
        assert!(e.message.contains("duplicate net"));
        let e = parse_fnl("inst u1 FOO a=b\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Semantic);
        assert!(e.message.contains("unknown cell `FOO`"));
        assert_eq!(e.span.column, 9);
    }

    #[test]
    fn forward_cell_references_resolve() {
        let src = "\
cell top
  port in x
  port out z
  inst b buf i=x o=z
end
cell buf
  port in i
  port out o
  inst n NOT a=i y=o
end
top top
";
        let n = parse_fnl(src).unwrap();
        let flat = flatten(&n, "top", Depth::Valve).unwrap();
        assert_eq!(valve_count(&flat).unwrap(), 1);
    }

    #[test]
    fn unclosed_cell() {
        let e = parse_fnl("cell a\nport in x\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert!(e.message.contains("`end`"));
    }

    #[test]
    fn round_trip_with_params_layers_and_magnitudes() {
        let src = "\
cell c
  port inout VAC
  port in t
  port in clk
  port out q
  inst ff TFF_BEHAV(edge=both,init=0) T=t CLK=clk Q=q Qbar=qb
  act a1 node=q c=5e-10 p=-40kPa
  junction j y=w in=q,qb layer=flow
  chamber ch node=w
  rest r a=w b=ATM
end
";
        let n = parse_fnl(src).unwrap();
        let text = serialize_fnl(&n);
        let again = parse_fnl(&text).unwrap();
        assert!(n.structurally_eq(&again), "{text}");
        assert_eq!(serialize_fnl(&again), text);
        assert!(text.contains("p=-4e4"), "{text}");
        assert!(text.contains("layer=flow"), "{text}");
    }

    #[test]
    fn missing_required_key() {
        let e = parse_fnl("valve v gate=a a=b").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert!(e.message.contains("`b=<net>`"), "{}", e.message);
    }
}
