//! Exit codes and diagnostics of the command-line driver.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fluidic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluidic"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fluidic")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn no_arguments_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidic(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn valid_netlist_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("inv.fnl"),
        "cell inverter\n  port inout VAC\n  port in a\n  port out y\n  inst g NOT a=a y=y\nend\ntop inverter\n",
    )
    .unwrap();
    let o = fluidic(dir.path(), &["check", "inv.fnl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn dangling_net_is_reported_with_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.fnl"),
        "cell inverter\n  port inout VAC\n  port in a\n  port out y\n  net unused\n  inst g NOT a=a y=y\nend\ntop inverter\n",
    )
    .unwrap();
    let o = fluidic(dir.path(), &["check", "bad.fnl"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.fnl:5:"), "{err}");
    assert!(err.contains("dangling net `unused`"), "{err}");
}

#[test]
fn nondeterministic_fsm_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("nd.fsm"),
        "fsm nd\ninput a b\noutput o\nstate S0\nstate S1\ninitial S0\nS0 -> S1 when a\nS0 -> S0 when b\nS1 -> S0\n",
    )
    .unwrap();
    let o = fluidic(dir.path(), &["check", "nd.fsm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("nd.fsm:8:"), "{err}");
    assert!(err.contains("nd.fsm:7:"), "{err}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidic(dir.path(), &["check", "nowhere.fnl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.fnl"));
}

#[test]
fn demo_writes_a_waveform() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidic(dir.path(), &["demo", "hexapod", "--cycles", "4", "-o", "walk.vcd"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let vcd = fs::read_to_string(dir.path().join("walk.vcd")).unwrap();
    assert_eq!(vcd.matches("$var ").count(), 10);
}

#[test]
fn synthesized_netlist_flattens_and_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let src = fluidic_core::hexapod::HEXAPOD_FSM;
    fs::write(dir.path().join("hexapod.fsm"), src).unwrap();
    let o = fluidic(dir.path(), &["synth", "hexapod.fsm", "--ideal-routing", "-o", "hex.fnl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = fluidic(dir.path(), &["flatten", "hex.fnl", "--depth", "valve", "-o", "flat.fnl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = fluidic(dir.path(), &["check", "flat.fnl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = fluidic(dir.path(), &["flatten", "flat.fnl", "--depth", "valve", "--count"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("11"));
}
