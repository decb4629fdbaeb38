use fluidic_core::netlist::{flatten, valve_count, ComponentKind, Depth};
use fluidic_core::synth::{synthesize, FlipFlopStyle, MapError, MapOptions, SynthError};
use fluidic_core::syntax::parse_fsm;

const HEXAPOD: &str = include_str!("../data/hexapod.fsm");

fn ideal() -> MapOptions {
    MapOptions {
        ideal_routing: true,
        ..MapOptions::default()
    }
}

#[test]
fn hexapod_is_one_flip_flop_and_one_inverter() {
    let spec = parse_fsm(HEXAPOD).unwrap();
    let s = synthesize(&spec, &ideal()).unwrap();
    assert_eq!(s.encoding.bits, 1);
    let (name, t) = &s.covers[0];
    assert_eq!(name, "T_Q");
    assert_eq!(t.display_with(&s.variables).to_string(), "x");
    let top = s.netlist.top_cell().unwrap();
    let cells: Vec<&str> = top.instances().map(|(_, c)| c).collect();
    assert_eq!(cells.iter().filter(|c| **c == "TFF_STRUCT").count(), 1);
    assert_eq!(cells.iter().filter(|c| **c == "NOT").count(), 1);
    let flat = flatten(&s.netlist, "hexapod", Depth::Valve).unwrap();
    assert_eq!(valve_count(&flat).unwrap(), 11);
    let ports: Vec<&str> = top.port_names().collect();
    assert_eq!(
        ports,
        ["VAC", "CLK", "x", "leg1", "leg2", "leg3", "leg4", "leg5", "leg6"]
    );
}

#[test]
fn two_bit_counter_excitation() {
    let spec = parse_fsm(
        "fsm count\nstate A\nstate B\nstate C\nstate D\ninitial A\nA -> B\nB -> C\nC -> D\nD -> A\n",
    )
    .unwrap();
    let s = synthesize(&spec, &MapOptions::default()).unwrap();
    assert_eq!(s.variables, ["Q0", "Q1"]);
    let shown: Vec<String> = s
        .covers
        .iter()
        .map(|(n, c)| format!("{n}={}", c.display_with(&s.variables)))
        .collect();
    assert_eq!(shown, ["T_Q0=1", "T_Q1=Q0"]);
}

#[test]
fn single_state_machine_has_no_flip_flops() {
    let spec = parse_fsm("fsm k\ninput a\noutput y\nstate S\ninitial S\nS -> S\nmealy y = !a\n").unwrap();
    let s = synthesize(&spec, &MapOptions::default()).unwrap();
    assert_eq!(s.encoding.bits, 0);
    let flat = flatten(&s.netlist, "k", Depth::Valve).unwrap();
    let top = flat.top_cell().unwrap();
    assert!(top
        .components
        .iter()
        .all(|c| !matches!(c.kind, ComponentKind::Instance { .. })));
    assert_eq!(top.count_valves(), 1);
}

#[test]
fn wide_product_exceeds_fan_in() {
    let spec = parse_fsm(
        "fsm w\ninput a b c\noutput y\nstate S\ninitial S\nS -> S\nmealy y = a & b & c\n",
    )
    .unwrap();
    let narrow = MapOptions {
        max_fan_in: 2,
        ..MapOptions::default()
    };
    match synthesize(&spec, &narrow) {
        Err(SynthError::Map(MapError::NandFanInExceeded { fan_in, max, .. })) => {
            assert_eq!((fan_in, max), (3, 2));
        }
        other => panic!("{other:?}"),
    }
    assert!(synthesize(&spec, &MapOptions::default()).is_ok());
}

#[test]
fn behavioral_flip_flops_carry_edge_mode() {
    let spec = parse_fsm(HEXAPOD).unwrap();
    let opts = MapOptions {
        flip_flops: FlipFlopStyle::Behavioral(fluidic_core::netlist::EdgeMode::Both),
        ..ideal()
    };
    let s = synthesize(&spec, &opts).unwrap();
    let ff = s.netlist.top_cell().unwrap().find_component("ff").unwrap();
    match &ff.kind {
        ComponentKind::Instance { params, .. } => {
            assert_eq!(params.get("edge").map(String::as_str), Some("both"));
        }
        k => panic!("{k:?}"),
    }
}
