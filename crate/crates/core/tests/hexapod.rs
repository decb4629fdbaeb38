use std::time::Instant;

use fluidic_core::hexapod::{run_demo, DemoConfig, DemoMode, Phase, Routing};
use fluidic_core::LogicLevel;

fn walk_pattern(cycles: usize) -> Vec<Phase> {
    let mut v = Vec::new();
    for _ in 0..cycles {
        v.push(Phase::WalkOdd);
        v.push(Phase::WalkEven);
    }
    v.push(Phase::Grasp);
    v
}

fn check(mode: DemoMode, routing: Routing) {
    let mut cfg = DemoConfig::walk_then_grasp(mode, 4);
    cfg.routing = routing;
    let t0 = Instant::now();
    let run = run_demo(&cfg).unwrap();
    eprintln!("{mode:?} {routing:?}: {:?}", t0.elapsed());
    assert!(run.oracle_match.is_equal(), "{mode:?}: {:?}", run.oracle_match);
    assert!(run.report.violations.is_empty(), "{:?}", run.report.violations);
    assert_eq!(run.report.phase_sequence(), walk_pattern(4));
}

#[test]
fn behavioral_demo() {
    check(DemoMode::Behavioral, Routing::Ideal);
}

#[test]
fn structural_demo() {
    check(DemoMode::Structural, Routing::Ideal);
    check(DemoMode::Structural, Routing::Valved);
}

#[test]
fn analog_demo() {
    check(DemoMode::Analog, Routing::Ideal);
}

#[test]
fn grasp_from_start_never_alternates() {
    let mut cfg = DemoConfig::walk_then_grasp(DemoMode::Behavioral, 4);
    cfg.x = vec![(0, false)];
    let run = run_demo(&cfg).unwrap();
    assert_eq!(run.report.phase_sequence(), [Phase::Grasp]);
    assert!(run.report.violations.is_empty());
}

#[test]
fn flip_flop_holds_during_grasp() {
    let cfg = DemoConfig::walk_then_grasp(DemoMode::Behavioral, 3);
    let run = run_demo(&cfg).unwrap();
    let fall = cfg.x[2].0;
    let q = run.trace.level_at("Q", fall).unwrap();
    assert_ne!(q, LogicLevel::LX);
    assert!(run.trace.changes("Q").iter().all(|c| c.0 < fall));
}
