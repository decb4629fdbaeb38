use fluidic_core::analog::{run_analog, timing_report, AnalogError, AnalogParams, Direction as Swing};
use fluidic_core::netlist::{Cell, Component, Direction, Magnitude, Netlist, ATM, VAC};
use fluidic_core::stimulus::Stimulus;
use fluidic_core::LogicLevel;

fn not_gate() -> Netlist {
    let mut n = Netlist::new().with_cell(
        Cell::new("top")
            .port(VAC, Direction::Inout)
            .port("a", Direction::In)
            .port("y", Direction::Out)
            .component(Component::instance("g", "NOT", &[("a", "a"), ("y", "y")])),
    );
    n.top = Some("top".into());
    n
}

#[test]
fn not_output_charges_exponentially() {
    let p = AnalogParams::default();
    let stim = Stimulus::default().event(0, "a", false);
    let run = run_analog(&not_gate(), &stim, &p, 300).unwrap();
    let tau = p.r_pull * p.c_node;
    for k in 1..=3 {
        let t = k as f64 * tau;
        let exact = p.p_vac * (1.0 - (-(k as f64)).exp());
        let got = run.analog.value_at("y", t).unwrap();
        assert!(((got - exact) / exact).abs() < 0.01, "k={k} got={got} exact={exact}");
    }
}

#[test]
fn not_switches_and_reports_timing() {
    let p = AnalogParams::default();
    let stim = Stimulus::default().event(0, "a", false).event(400, "a", true);
    let run = run_analog(&not_gate(), &stim, &p, 800).unwrap();
    assert_eq!(run.logic.level_at("y", 390), Some(LogicLevel::L1));
    assert_eq!(run.logic.level_at("y", 790), Some(LogicLevel::L0));
    assert_eq!(run.valve_events.len(), 1);
    let report = timing_report(&run.analog, p.p_vac);
    let y = report.iter().find(|r| r.net == "y").unwrap();
    assert_eq!(y.transitions[0].direction, Swing::Fall);
    assert_eq!(y.transitions[1].direction, Swing::Rise);
    let (lo, hi) = run.analog.bounds();
    assert!(lo >= p.p_vac - 1e-6 && hi <= 1e-6);
}

#[test]
fn latch_holds_with_initial_state() {
    let mut n = Netlist::new().with_cell(
        Cell::new("top")
            .port(VAC, Direction::Inout)
            .port("nS", Direction::In)
            .port("nR", Direction::In)
            .port("Q", Direction::Out)
            .port("Qbar", Direction::Out)
            .component(Component::instance(
                "l",
                "SR_LATCH",
                &[("nS", "nS"), ("nR", "nR"), ("Q", "Q"), ("Qbar", "Qbar")],
            )),
    );
    n.top = Some("top".into());
    let p = AnalogParams::default();
    let stim = Stimulus::default()
        .init("Q", false)
        .event(0, "nS", true)
        .event(0, "nR", true)
        .event(200, "nS", false)
        .event(500, "nS", true)
        .event(700, "nR", false)
        .event(1000, "nR", true);
    let run = run_analog(&n, &stim, &p, 1300).unwrap();
    assert_eq!(run.logic.level_at("Q", 150), Some(LogicLevel::L0));
    assert_eq!(run.logic.level_at("Q", 650), Some(LogicLevel::L1));
    assert_eq!(run.logic.level_at("Qbar", 650), Some(LogicLevel::L0));
    assert_eq!(run.logic.level_at("Q", 1250), Some(LogicLevel::L0));
}

#[test]
fn floating_node_is_rejected() {
    let mut n = Netlist::new().with_cell(
        Cell::new("top")
            .port(VAC, Direction::Inout)
            .port("y", Direction::Out)
            .net("g")
            .component(Component::valve("v", "g", "y", ATM))
            .component(Component::restriction("r", VAC, "y", Magnitude::Default)),
    );
    n.top = Some("top".into());
    let e = run_analog(&n, &Stimulus::default(), &AnalogParams::default(), 10).unwrap_err();
    assert_eq!(e, AnalogError::FloatingNode("g".into()));
}
