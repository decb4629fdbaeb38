use proptest::prelude::*;

use fluidic_core::netlist::{flatten, valve_count, Cell, Component, Depth, Direction, LibCell, Netlist, VAC};
use fluidic_core::stimulus::{ClockDef, Stimulus};
use fluidic_core::synth::{minimize, TruthTable, TtValue};
use fluidic_core::syntax::fnl::{parse_fnl, serialize_fnl};
use fluidic_core::syntax::fsm::{parse_fsm, serialize_fsm};
use fluidic_core::syntax::params::parse_params;
use fluidic_core::syntax::stim::{parse_stim, serialize_stim};

fn tt_value() -> impl Strategy<Value = TtValue> {
    prop_oneof![Just(TtValue::Zero), Just(TtValue::One), Just(TtValue::DontCare)]
}

/// `(states, inputs, transitions, moore bits)`; transitions are full
/// minterm guards so the machine is complete and deterministic.
fn fsm_text() -> impl Strategy<Value = String> {
    (1usize..=4, 0usize..=2).prop_flat_map(|(states, inputs)| {
        let combos = 1usize << inputs;
        (
            Just(states),
            Just(inputs),
            prop::collection::vec(0..states, states * combos),
            prop::collection::vec(any::<bool>(), states),
        )
            .prop_map(|(states, inputs, next, moore)| {
                let mut s = String::from("fsm m\n");
                if inputs > 0 {
                    let names: Vec<String> = (0..inputs).map(|i| format!("i{i}")).collect();
                    s += &format!("input {}\n", names.join(" "));
                }
                s += "output o\n";
                for (k, m) in moore.iter().enumerate() {
                    s += &format!("state S{k}{}\n", if *m { " o=1" } else { "" });
                }
                s += "initial S0\n";
                let combos = 1usize << inputs;
                for k in 0..states {
                    for c in 0..combos {
                        let guard: Vec<String> = (0..inputs)
                            .map(|j| if (c >> j) & 1 == 1 { format!("i{j}") } else { format!("!i{j}") })
                            .collect();
                        let to = next[k * combos + c];
                        if guard.is_empty() {
                            s += &format!("S{k} -> S{to}\n");
                        } else {
                            s += &format!("S{k} -> S{to} when {}\n", guard.join(" & "));
                        }
                    }
                }
                s
            })
    })
}

fn stimulus() -> impl Strategy<Value = Stimulus> {
    (
        prop::collection::vec((0u64..50, 0usize..3, any::<bool>()), 0..12),
        prop::option::of((2u64..40, 1u32..10, 0u64..20, any::<bool>())),
        prop::collection::vec((0usize..3, any::<bool>()), 0..3),
        prop::option::of(0u64..500),
    )
        .prop_map(|(mut events, clock, inits, end)| {
            let nets = ["a", "b", "c"];
            events.sort_by_key(|e| e.0);
            let mut s = Stimulus::default();
            let mut t = 0;
            for (dt, n, l) in events {
                t += dt;
                s = s.event(t, nets[n], l);
            }
            if let Some((period, tenths, phase, start)) = clock {
                s = s.clock(ClockDef {
                    net: "clk".into(),
                    period,
                    duty: f64::from(tenths) / 10.0,
                    phase,
                    start,
                });
            }
            for (n, l) in inits {
                s = s.init(nets[n], l);
            }
            s.end_time = end;
            s
        })
}

/// A feed-forward cell of NOT/NAND/OR2 instances. Gate `i` drives `w{i}`
/// (the last one drives `y`) from the inputs and earlier gate outputs.
fn gate_netlist() -> impl Strategy<Value = Netlist> {
    let gate = prop_oneof![
        Just(LibCell::Not),
        (2usize..=4).prop_map(LibCell::Nand),
        Just(LibCell::Or2),
    ];
    prop::collection::vec((gate, prop::collection::vec(any::<prop::sample::Index>(), 4)), 1..8).prop_map(|gates| {
        let count = gates.len();
        let mut cell = Cell::new("top")
            .port(VAC, Direction::Inout)
            .port("a", Direction::In)
            .port("b", Direction::In)
            .port("y", Direction::Out);
        let mut signals: Vec<String> = vec!["a".into(), "b".into()];
        for (i, (lib, picks)) in gates.into_iter().enumerate() {
            let out = if i + 1 == count { "y".to_string() } else { format!("w{i}") };
            let mut ports: Vec<(String, String)> = Vec::new();
            let mut ins = picks.iter();
            for p in lib.ports() {
                let net = if p.dir == Direction::Out {
                    out.clone()
                } else {
                    let k = ins.next().expect("enough picks");
                    signals[k.index(signals.len())].clone()
                };
                ports.push((p.name.clone(), net));
            }
            let refs: Vec<(&str, &str)> = ports.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            cell = cell.component(Component::instance(&format!("g{i}"), &lib.name(), &refs));
            signals.push(out);
        }
        cell.declare_used_nets();
        let mut n = Netlist::new().with_cell(cell);
        n.top = Some("top".into());
        n
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn minimized_covers_are_exact(vars in 1usize..=6, seed in prop::collection::vec(tt_value(), 64)) {
        let tt = TruthTable::from_fn(vars, |r| seed[r as usize]);
        let cover = minimize(&tt).unwrap();
        prop_assert!(cover.matches(&tt));
        let ones = (0..1u32 << vars).filter(|&r| seed[r as usize] == TtValue::One).count();
        let (terms, lits) = cover.cost();
        prop_assert!(terms <= ones && lits <= ones * vars);
        prop_assert_eq!(minimize(&tt).unwrap(), cover);
    }

    #[test]
    fn fsm_text_round_trips(text in fsm_text()) {
        let spec = parse_fsm(&text).unwrap();
        let canon = serialize_fsm(&spec);
        let again = parse_fsm(&canon).unwrap();
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(serialize_fsm(&again), canon);
    }

    #[test]
    fn stimulus_round_trips(stim in stimulus()) {
        let text = serialize_stim(&stim);
        let back = parse_stim(&text).unwrap();
        prop_assert_eq!(back, stim);
    }

    #[test]
    fn netlist_round_trips(n in gate_netlist()) {
        let text = serialize_fnl(&n);
        let back = parse_fnl(&text).unwrap();
        prop_assert!(back.structurally_eq(&n));
        prop_assert_eq!(serialize_fnl(&back), text);
    }

    #[test]
    fn flatten_is_idempotent_and_additive(n in gate_netlist()) {
        let flat = flatten(&n, "top", Depth::Valve).unwrap();
        let twice = flatten(&flat, "top", Depth::Valve).unwrap();
        prop_assert!(twice.structurally_eq(&flat));
        let expected: usize = n
            .top_cell()
            .unwrap()
            .instances()
            .map(|(_, c)| LibCell::lookup(c).and_then(LibCell::valve_count).unwrap())
            .sum();
        prop_assert_eq!(valve_count(&flat).unwrap(), expected);
        let reparsed = parse_fnl(&serialize_fnl(&flat)).unwrap();
        prop_assert!(reparsed.structurally_eq(&flat));
    }

    #[test]
    fn parsers_never_panic(text in "(?s).{0,200}") {
        let _ = parse_fnl(&text);
        let _ = parse_fsm(&text);
        let _ = parse_stim(&text);
        let _ = parse_params(&text);
    }

    #[test]
    fn parsers_never_panic_on_near_miss(text in "(cell|fsm|port|inst|valve|state|clock|@|->|when|end|=|[a-z0-9]| |\n|!|&|\\|){0,60}") {
        let _ = parse_fnl(&text);
        let _ = parse_fsm(&text);
        let _ = parse_stim(&text);
        let _ = parse_params(&text);
    }
}
