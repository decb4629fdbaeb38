//! Walk/grasp hexapod controller: netlist, demo runs and gait checks.

use serde::{Deserialize, Serialize};

use crate::analog::{run_analog, AnalogError, AnalogParams, AnalogTrace};
use crate::fsm::{reference_trace, FsmSpec};
use crate::level::LogicLevel;
use crate::logic::{compare_traces, simulate, CompareError, Delays, SimError, SimOptions, Trace, TraceMatch};
use crate::netlist::{Cell, Component, Direction, Netlist, VAC};
use crate::stimulus::{ClockDef, Stimulus};
use crate::syntax::fsm::parse_fsm_named;

pub const HEXAPOD_FSM: &str = include_str!("../data/hexapod.fsm");
pub const GRASP_WALK_FSM: &str = include_str!("../data/grasp_walk.fsm");

pub const LEGS: [&str; 6] = ["leg1", "leg2", "leg3", "leg4", "leg5", "leg6"];
/// Legs driven by Q.
pub const ODD_TRIPOD: [usize; 3] = [1, 3, 5];
/// Legs driven by Qbar.
pub const EVEN_TRIPOD: [usize; 3] = [2, 4, 6];

pub fn bundled_fsm() -> FsmSpec {
    parse_fsm_named(HEXAPOD_FSM, "hexapod.fsm").expect("bundled FSM parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerMode {
    /// Both-edge behavioral T flip-flop.
    Behavioral,
    /// Level-sensitive NAND flip-flop, one toggle per clock pulse.
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routing {
    /// Lossless junctions merge the grasp signal into each group.
    #[default]
    Ideal,
    /// A valved OR2 per group.
    Valved,
}

/// Ports VAC, CLK, x, leg1..leg6; internal nets x_n, Q, Qbar.
pub fn build_controller(mode: ControllerMode, routing: Routing) -> Netlist {
    let mut cell = Cell::new("hexapod")
        .port(VAC, Direction::Inout)
        .port("CLK", Direction::In)
        .port("x", Direction::In);
    for leg in LEGS {
        cell = cell.port(leg, Direction::Out);
    }
    cell = cell
        .net("x_n")
        .net("Q")
        .net("Qbar")
        .component(Component::instance("inv", "NOT", &[("a", "x"), ("y", "x_n")]));
    let ports = [("T", "x"), ("CLK", "CLK"), ("Q", "Q"), ("Qbar", "Qbar")];
    cell = cell.component(match mode {
        ControllerMode::Structural => Component::instance("ff", "TFF_STRUCT", &ports),
        ControllerMode::Behavioral => Component::instance("ff", "TFF_BEHAV", &ports)
            .with_param("edge", "both")
            .with_param("init", "0"),
    });
    let groups = [("odd", "Q", &ODD_TRIPOD), ("even", "Qbar", &EVEN_TRIPOD)];
    for (group, state, legs) in groups {
        match routing {
            Routing::Ideal => {
                for &i in legs {
                    let leg = LEGS[i - 1];
                    cell = cell.component(Component::junction(
                        &format!("route_{leg}"),
                        &[state, "x_n"],
                        leg,
                    ));
                }
            }
            Routing::Valved => {
                let net = format!("grp_{group}");
                cell = cell.net(&net).component(Component::instance(
                    &format!("or_{group}"),
                    "OR2",
                    &[("a1", state), ("a2", "x_n"), ("y", &net)],
                ));
                for &i in legs {
                    let leg = LEGS[i - 1];
                    cell = cell.component(Component::junction(&format!("route_{leg}"), &[&net], leg));
                }
            }
        }
    }
    for leg in LEGS {
        cell = cell.component(Component::actuator(&format!("act_{leg}"), leg));
    }
    let mut n = Netlist::new().with_cell(cell);
    n.top = Some("hexapod".into());
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoMode {
    Behavioral,
    Structural,
    Analog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub mode: DemoMode,
    pub routing: Routing,
    /// Clock period in units. Behavioral mode drives a square wave;
    /// the others receive one pulse per half period.
    pub period: u64,
    /// First clock edge.
    pub phase: u64,
    /// Pulse width for structural and analog modes.
    pub pulse_width: u64,
    /// Changes of x, the first at time 0.
    pub x: Vec<(u64, bool)>,
    pub until: u64,
    pub settle: u64,
    /// Seconds per unit.
    pub timescale: f64,
    pub delays: Delays,
    pub params: AnalogParams,
}

impl DemoConfig {
    /// x=1 for `cycles` clock periods, then x=0 for two more periods.
    pub fn walk_then_grasp(mode: DemoMode, cycles: u64) -> Self {
        let (period, pulse_width, settle, timescale) = match mode {
            DemoMode::Analog => (2000, 150, 600, 1e-3),
            _ => (40, 3, 10, 1e-9),
        };
        let rise = period / 8;
        DemoConfig {
            mode,
            routing: Routing::Ideal,
            period,
            phase: period / 4,
            pulse_width,
            x: vec![(0, false), (rise, true), (rise + cycles * period, false)],
            until: rise + (cycles + 2) * period,
            settle,
            timescale,
            delays: Delays::default(),
            params: AnalogParams::default(),
        }
    }

    /// Times at which the phase may advance: every behavioral clock edge.
    pub fn ticks(&self) -> Vec<u64> {
        let half = self.period / 2;
        (0..)
            .map(|k| self.phase + k * half)
            .take_while(|&t| t <= self.until)
            .collect()
    }

    pub fn stimulus(&self) -> Stimulus {
        let clock = match self.mode {
            DemoMode::Behavioral => ClockDef {
                net: "CLK".into(),
                period: self.period,
                duty: 0.5,
                phase: self.phase,
                start: false,
            },
            _ => {
                let half = self.period / 2;
                ClockDef {
                    net: "CLK".into(),
                    period: half,
                    duty: self.pulse_width as f64 / half as f64,
                    phase: self.phase,
                    start: false,
                }
            }
        };
        let mut stim = Stimulus {
            timescale: self.timescale,
            ..Stimulus::default()
        }
        .clock(clock)
        .until(self.until);
        for &(t, level) in &self.x {
            stim = stim.event(t, "x", level);
        }
        if self.mode != DemoMode::Behavioral {
            stim = stim.init("Q", false).init("Qbar", true);
        }
        stim
    }

    fn min_period(&self) -> f64 {
        match self.mode {
            DemoMode::Analog => {
                6.0 * self.params.r_pull * self.params.c_node / self.timescale
            }
            _ => {
                let d = &self.delays;
                6.0 * [d.not, d.nand, d.ff].into_iter().max().unwrap_or(1) as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemoError {
    #[error("clock period {period} is below the minimum of {min} units")]
    PeriodTooShort { period: u64, min: f64 },
    #[error("pulse width {width} must be positive and below half the period {half}")]
    BadPulseWidth { width: u64, half: u64 },
    #[error(transparent)]
    Logic(#[from] SimError),
    #[error(transparent)]
    Analog(#[from] AnalogError),
    #[error(transparent)]
    Compare(#[from] CompareError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    WalkOdd,
    WalkEven,
    Grasp,
    Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseInterval {
    pub start: u64,
    pub end: u64,
    pub phase: Phase,
    /// Engaged leg numbers.
    pub engaged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LegIntervals {
    pub leg: usize,
    /// Half-open engagement intervals, disjoint and ordered.
    pub intervals: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Both tripods engaged while walking.
    Overlap,
    /// Walking without exactly one full tripod down.
    PartialTripod,
    /// Grasp requested but not all legs engaged.
    GraspIncomplete,
    /// No full tripod for longer than the settle window.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaitReport {
    pub until: u64,
    pub settle: u64,
    pub x: Vec<(u64, bool)>,
    pub ticks: Vec<u64>,
    pub legs: Vec<LegIntervals>,
    pub phases: Vec<PhaseInterval>,
    pub violations: Vec<Violation>,
}

impl GaitReport {
    /// Phases that persist outside settle windows, transitions dropped and
    /// consecutive repeats merged.
    pub fn phase_sequence(&self) -> Vec<Phase> {
        let windows = self.settle_windows();
        let mut out: Vec<Phase> = Vec::new();
        for p in &self.phases {
            if p.phase == Phase::Transition || outside(p.start, p.end, &windows).is_empty() {
                continue;
            }
            if out.last() != Some(&p.phase) {
                out.push(p.phase);
            }
        }
        out
    }

    /// `[t, t + settle)` after every x change and clock tick.
    pub fn settle_windows(&self) -> Vec<(u64, u64)> {
        let mut starts: Vec<u64> = self.x.iter().map(|c| c.0).chain(self.ticks.iter().copied()).collect();
        starts.sort_unstable();
        starts.dedup();
        starts.iter().map(|&t| (t, t + self.settle)).collect()
    }

    pub fn x_at(&self, t: u64) -> bool {
        self.x.iter().take_while(|c| c.0 <= t).last().is_some_and(|c| c.1)
    }
}

fn classify(engaged: &[usize]) -> Phase {
    let has = |set: &[usize; 3]| set.iter().all(|l| engaged.contains(l));
    match (has(&ODD_TRIPOD), has(&EVEN_TRIPOD)) {
        (true, true) => Phase::Grasp,
        _ if engaged.len() == 3 && has(&ODD_TRIPOD) => Phase::WalkOdd,
        _ if engaged.len() == 3 && has(&EVEN_TRIPOD) => Phase::WalkEven,
        _ => Phase::Transition,
    }
}

/// Builds the report from leg engagement levels (L1 = engaged); LX counts
/// as not engaged. Violations are filled in by [`check_gait`].
pub fn gait_report(
    engagement: &Trace,
    x: &[(u64, bool)],
    ticks: &[u64],
    settle: u64,
    until: u64,
) -> GaitReport {
    let engaged_at = |leg: &str, t: u64| engagement.level_at(leg, t) == Some(LogicLevel::L1);
    let mut cuts: Vec<u64> = LEGS
        .iter()
        .flat_map(|l| engagement.changes(l).iter().map(|c| c.0))
        .chain([0, until])
        .filter(|&t| t <= until)
        .collect();
    cuts.sort_unstable();
    cuts.dedup();

    let mut legs: Vec<LegIntervals> = (1..=6)
        .map(|leg| LegIntervals {
            leg,
            intervals: Vec::new(),
        })
        .collect();
    let mut phases: Vec<PhaseInterval> = Vec::new();
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        let engaged: Vec<usize> = (1..=6).filter(|&i| engaged_at(LEGS[i - 1], s)).collect();
        for &i in &engaged {
            let iv = &mut legs[i - 1].intervals;
            match iv.last_mut() {
                Some(last) if last.1 == s => last.1 = e,
                _ => iv.push((s, e)),
            }
        }
        let phase = classify(&engaged);
        match phases.last_mut() {
            Some(last) if last.end == s && last.engaged == engaged => last.end = e,
            _ => phases.push(PhaseInterval {
                start: s,
                end: e,
                phase,
                engaged,
            }),
        }
    }
    let mut report = GaitReport {
        until,
        settle,
        x: x.to_vec(),
        ticks: ticks.to_vec(),
        legs,
        phases,
        violations: Vec::new(),
    };
    report.violations = check_gait(&report);
    report
}

/// Gait invariants. Instants within `settle` after an x change or clock
/// tick are exempt from the per-phase checks.
pub fn check_gait(report: &GaitReport) -> Vec<Violation> {
    let windows = report.settle_windows();
    let mut out = Vec::new();
    for p in &report.phases {
        let pieces = outside(p.start, p.end, &windows);
        for (a, b) in pieces {
            let kind = if report.x_at(a) {
                match p.phase {
                    Phase::WalkOdd | Phase::WalkEven => continue,
                    Phase::Grasp => ViolationKind::Overlap,
                    Phase::Transition => ViolationKind::PartialTripod,
                }
            } else if p.phase == Phase::Grasp {
                continue;
            } else {
                ViolationKind::GraspIncomplete
            };
            push_violation(&mut out, kind, a, b);
        }
        let supported = p.phase != Phase::Transition;
        if !supported && p.end - p.start > report.settle {
            push_violation(&mut out, ViolationKind::Unsupported, p.start, p.end);
        }
    }
    out
}

/// Parts of `[start, end)` not covered by any window.
fn outside(start: u64, end: u64, windows: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut pieces = vec![(start, end)];
    for &(ws, we) in windows {
        pieces = pieces
            .into_iter()
            .flat_map(|(a, b)| {
                let mut v = Vec::new();
                if a < ws.min(b) {
                    v.push((a, ws.min(b)));
                }
                if we.max(a) < b {
                    v.push((we.max(a), b));
                }
                v
            })
            .collect();
    }
    pieces
}

fn push_violation(out: &mut Vec<Violation>, kind: ViolationKind, start: u64, end: u64) {
    if let Some(last) = out.last_mut() {
        if last.kind == kind && last.end == start {
            last.end = end;
            return;
        }
    }
    out.push(Violation { kind, start, end });
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoRun {
    pub config: DemoConfig,
    /// Simulated logic levels (thresholded in analog mode).
    pub trace: Trace,
    pub analog: Option<AnalogTrace>,
    /// The FSM interpreter rendered on the same ticks and x waveform.
    pub oracle: Trace,
    /// Legs and Q against the oracle outside settle windows.
    pub oracle_match: TraceMatch,
    pub report: GaitReport,
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoRun, DemoError> {
    let min = cfg.min_period();
    if (cfg.period as f64) < min {
        return Err(DemoError::PeriodTooShort {
            period: cfg.period,
            min,
        });
    }
    let half = cfg.period / 2;
    if cfg.mode != DemoMode::Behavioral && (cfg.pulse_width == 0 || cfg.pulse_width >= half) {
        return Err(DemoError::BadPulseWidth {
            width: cfg.pulse_width,
            half,
        });
    }
    let stim = cfg.stimulus();
    let (trace, analog, engagement) = match cfg.mode {
        DemoMode::Behavioral | DemoMode::Structural => {
            let mode = if cfg.mode == DemoMode::Behavioral {
                ControllerMode::Behavioral
            } else {
                ControllerMode::Structural
            };
            let netlist = build_controller(mode, cfg.routing);
            let opts = SimOptions {
                delays: cfg.delays,
                ..SimOptions::default()
            };
            let trace = simulate(&netlist, &stim, &opts, cfg.until)?;
            let engagement = trace.select(&LEGS);
            (trace, None, engagement)
        }
        DemoMode::Analog => {
            let netlist = build_controller(ControllerMode::Structural, cfg.routing);
            let run = run_analog(&netlist, &stim, &cfg.params, cfg.until)?;
            let engagement = engagement_from_pressure(&run.analog, cfg.params.p_eng, stim.timescale, cfg.until);
            (run.logic, Some(run.analog), engagement)
        }
    };

    let spec = bundled_fsm();
    let inputs: Vec<(u64, u32)> = cfg.x.iter().map(|&(t, v)| (t, u32::from(v))).collect();
    let ticks = cfg.ticks();
    let oracle = reference_trace(&spec, &ticks, &inputs, cfg.until);
    let mut nets: Vec<&str> = LEGS.to_vec();
    nets.push("Q");
    let oracle_match = compare_traces(&trace, &oracle, &nets, cfg.settle)?;
    let report = gait_report(&engagement, &cfg.x, &ticks, cfg.settle, cfg.until);
    Ok(DemoRun {
        config: cfg.clone(),
        trace,
        analog,
        oracle,
        oracle_match,
        report,
    })
}

/// Legs at or below `p_eng` count as engaged. Times are floored to units.
pub fn engagement_from_pressure(analog: &AnalogTrace, p_eng: f64, timescale: f64, until: u64) -> Trace {
    let mut trace = Trace::new(until);
    for leg in LEGS {
        let Some(series) = analog.series(leg) else {
            continue;
        };
        for (t, p) in series {
            let unit = ((t / timescale) + 1e-9).floor() as u64;
            trace.record(leg, unit.min(until), LogicLevel::from_bool(p <= p_eng));
        }
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{flatten, valve_count, Depth};

    fn valves(mode: ControllerMode, routing: Routing) -> usize {
        let n = build_controller(mode, routing);
        valve_count(&flatten(&n, "hexapod", Depth::Valve).unwrap()).unwrap()
    }

    #[test]
    fn switch_counts() {
        assert_eq!(valves(ControllerMode::Structural, Routing::Ideal), 11);
        assert_eq!(valves(ControllerMode::Structural, Routing::Valved), 15);
    }

    #[test]
    fn ports() {
        let n = build_controller(ControllerMode::Structural, Routing::Ideal);
        let ports: Vec<&str> = n.top_cell().unwrap().port_names().collect();
        assert_eq!(ports, ["VAC", "CLK", "x", "leg1", "leg2", "leg3", "leg4", "leg5", "leg6"]);
    }

    #[test]
    fn tripods_partition_legs() {
        let mut all: Vec<usize> = ODD_TRIPOD.iter().chain(&EVEN_TRIPOD).copied().collect();
        all.sort_unstable();
        assert_eq!(all, [1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn empty_trace_passes() {
        let r = gait_report(&Trace::new(0), &[(0, true)], &[], 5, 0);
        assert!(r.phases.is_empty());
        assert!(check_gait(&r).is_empty());
    }

    #[test]
    fn injected_overlap_is_reported() {
        let mut t = Trace::new(100);
        for (i, leg) in LEGS.iter().enumerate() {
            let odd = i % 2 == 0;
            t.record(leg, 0, LogicLevel::from_bool(odd));
        }
        for leg in ["leg2", "leg4", "leg6"] {
            t.record(leg, 40, LogicLevel::L1);
            t.record(leg, 60, LogicLevel::L0);
        }
        let r = gait_report(&t, &[(0, true)], &[], 5, 100);
        assert_eq!(
            r.violations,
            vec![Violation {
                kind: ViolationKind::Overlap,
                start: 40,
                end: 60
            }]
        );
    }
}
