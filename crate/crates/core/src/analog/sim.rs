use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::network::{AnalogError, Network, NodeRole};
use super::AnalogParams;
use crate::level::LogicLevel;
use crate::logic::Trace;
use crate::netlist::Netlist;
use crate::stimulus::Stimulus;

/// Pressures of every net (rails included) and valve states at `time`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalogState {
    pub time: f64,
    pub pressure: Vec<f64>,
    pub open: Vec<bool>,
}

/// Sampled pressures. `samples[k][i]` is net `nets[i]` at `times[k]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AnalogTrace {
    pub nets: Vec<String>,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
}

impl AnalogTrace {
    pub fn net_index(&self, net: &str) -> Option<usize> {
        self.nets.iter().position(|n| n == net)
    }

    pub fn series(&self, net: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.net_index(net)?;
        Some(self.times.iter().zip(&self.samples).map(|(&t, s)| (t, s[i])).collect())
    }

    /// Linear interpolation between samples, clamped at both ends.
    pub fn value_at(&self, net: &str, t: f64) -> Option<f64> {
        let i = self.net_index(net)?;
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.samples.first().map(|s| s[i]);
        }
        if k >= self.times.len() {
            return self.samples.last().map(|s| s[i]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (self.samples[k - 1][i], self.samples[k][i]);
        Some(if t1 > t0 { p0 + (p1 - p0) * (t - t0) / (t1 - t0) } else { p1 })
    }

    pub fn final_value(&self, net: &str) -> Option<f64> {
        let i = self.net_index(net)?;
        self.samples.last().map(|s| s[i])
    }

    /// Smallest and largest recorded pressure over all nets.
    pub fn bounds(&self) -> (f64, f64) {
        self.samples.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValveEvent {
    pub time: f64,
    pub valve: String,
    pub open: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalogRun {
    pub analog: AnalogTrace,
    /// Thresholded levels in stimulus time units. Stimulus nets carry their
    /// logical values.
    pub logic: Trace,
    pub valve_events: Vec<ValveEvent>,
    pub timescale: f64,
}

/// Piecewise-linear source: each stimulus change ramps over `slew`.
#[derive(Debug, Clone)]
struct Source {
    node: usize,
    /// `(start time, target pressure)`, sorted.
    ramps: Vec<(f64, f64)>,
    initial: f64,
}

impl Source {
    fn value(&self, t: f64, slew: f64) -> f64 {
        let mut p = self.initial;
        for &(start, target) in &self.ramps {
            if t <= start {
                break;
            }
            if slew <= 0.0 || t >= start + slew {
                p = target;
            } else {
                p += (target - p) * (t - start) / slew;
                break;
            }
        }
        p
    }
}

/// Implicit-Euler integrator with hysteretic valves.
pub struct AnalogSim {
    pub net: Network,
    pub params: AnalogParams,
    pub state: AnalogState,
    sources: Vec<Source>,
    cached: Option<(Vec<bool>, f64, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
    pub valve_events: Vec<ValveEvent>,
}

impl AnalogSim {
    /// Sources are materialized up to `until` stimulus units.
    pub fn new(
        netlist: &Netlist,
        stim: &Stimulus,
        params: &AnalogParams,
        until: u64,
    ) -> Result<Self, AnalogError> {
        let driven = stim.driven_nets();
        let net = Network::build(netlist, &driven, params)?;
        let events = stim.expand(until);
        let sources = driven
            .iter()
            .map(|name| {
                let node = net.index[name];
                let mut initial = 0.0;
                let mut ramps = Vec::new();
                for e in events.iter().filter(|e| &e.net == name) {
                    let p = params.level_pressure(e.level);
                    if e.time == 0 {
                        initial = p;
                    } else {
                        ramps.push((e.time as f64 * stim.timescale, p));
                    }
                }
                Source {
                    node,
                    ramps,
                    initial,
                }
            })
            .collect();
        let n = net.names.len();
        let mut pressure = vec![0.0; n];
        pressure[0] = params.p_vac;
        let mut sim = AnalogSim {
            state: AnalogState {
                time: 0.0,
                pressure: Vec::new(),
                open: vec![false; net.valves.len()],
            },
            net,
            params: params.clone(),
            sources,
            cached: None,
            valve_events: Vec::new(),
        };
        for s in &sim.sources {
            pressure[s.node] = s.initial;
        }
        sim.state.pressure = pressure;

        if !stim.inits.is_empty() {
            let mut pinned = Vec::new();
            for (name, level) in &stim.inits {
                let &i = sim
                    .net
                    .index
                    .get(name)
                    .ok_or_else(|| AnalogError::UnknownNet(name.clone()))?;
                pinned.push((i, params.level_pressure(*level)));
            }
            sim.operating_point(&pinned)?;
        } else {
            for k in 0..sim.net.valves.len() {
                sim.state.open[k] = sim.state.pressure[sim.net.valves[k].gate] <= params.p_open;
            }
        }
        Ok(sim)
    }

    fn role(&self, node: usize, pinned: &[(usize, f64)]) -> Option<usize> {
        if pinned.iter().any(|p| p.0 == node) {
            return None;
        }
        match self.net.roles[node] {
            NodeRole::Free(k) => Some(k),
            _ => None,
        }
    }

    /// Assembles `(C/h + G) x = C/h p + b` (or the DC system when `h` is
    /// `None`) for the given valve states, evaluating sources at `t`.
    fn assemble(
        &self,
        open: &[bool],
        h: Option<f64>,
        t: f64,
        pinned: &[(usize, f64)],
    ) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.net.free.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        let p = &self.state.pressure;
        let pin = |node: usize| -> f64 {
            if let Some(&(_, v)) = pinned.iter().find(|q| q.0 == node) {
                return v;
            }
            match self.net.roles[node] {
                NodeRole::Rail(v) => v,
                NodeRole::Source => self
                    .sources
                    .iter()
                    .find(|s| s.node == node)
                    .map(|s| s.value(t, self.params.slew))
                    .unwrap_or(0.0),
                NodeRole::Free(_) => p[node],
            }
        };
        let stamp = |i: usize, j: usize, g: f64, a: &mut DMatrix<f64>, b: &mut DVector<f64>| {
            match (self.role(i, pinned), self.role(j, pinned)) {
                (Some(x), Some(y)) => {
                    a[(x, x)] += g;
                    a[(y, y)] += g;
                    a[(x, y)] -= g;
                    a[(y, x)] -= g;
                }
                (Some(x), None) => {
                    a[(x, x)] += g;
                    b[x] += g * pin(j);
                }
                (None, Some(y)) => {
                    a[(y, y)] += g;
                    b[y] += g * pin(i);
                }
                (None, None) => {}
            }
        };
        for &(i, j, g) in &self.net.fixed {
            stamp(i, j, g, &mut a, &mut b);
        }
        for (v, &is_open) in self.net.valves.iter().zip(open) {
            let r = if is_open { self.params.r_on } else { self.params.r_off };
            stamp(v.a, v.b, 1.0 / r, &mut a, &mut b);
        }
        let g_on = 1.0 / self.params.r_on;
        for j in &self.net.junctions {
            if let Some(x) = self.role(j.output, pinned) {
                let src = j.inputs.iter().map(|&i| p[i]).fold(f64::INFINITY, f64::min);
                a[(x, x)] += g_on;
                b[x] += g_on * src;
            }
        }
        if let Some(h) = h {
            for (k, &node) in self.net.free.iter().enumerate() {
                if self.role(node, pinned).is_some() {
                    let c = self.net.cap[k] / h;
                    a[(k, k)] += c;
                    b[k] += c * p[node];
                }
            }
        }
        // Pinned unknowns keep an identity row.
        for &(node, v) in pinned {
            if let NodeRole::Free(k) = self.net.roles[node] {
                a[(k, k)] = 1.0;
                b[k] = v;
            }
        }
        (a, b)
    }

    /// DC solution with `pinned` nets held, iterating valve states and
    /// junction sources to a fixed point.
    fn operating_point(&mut self, pinned: &[(usize, f64)]) -> Result<(), AnalogError> {
        let mid = 0.5 * (self.params.p_open + self.params.p_close);
        for &(node, v) in pinned {
            self.state.pressure[node] = v;
        }
        for _ in 0..200 {
            let open: Vec<bool> = self
                .net
                .valves
                .iter()
                .map(|v| self.state.pressure[v.gate] <= mid)
                .collect();
            let (a, b) = self.assemble(&open, None, 0.0, pinned);
            let x = a
                .lu()
                .solve(&b)
                .ok_or(AnalogError::NonConvergence { time: 0.0 })?;
            let mut delta: f64 = 0.0;
            for (k, &node) in self.net.free.iter().enumerate() {
                let v = x[k].clamp(self.params.p_vac, 0.0);
                delta = delta.max((self.state.pressure[node] - v).abs());
                self.state.pressure[node] = v;
            }
            let settled = open == self.state.open && delta < 1e-6;
            self.state.open = open;
            if settled {
                break;
            }
        }
        for (k, v) in self.net.valves.iter().enumerate() {
            self.state.open[k] = self.state.pressure[v.gate] <= mid;
        }
        Ok(())
    }

    fn solve(&mut self, open: &[bool], h: f64) -> Result<Vec<f64>, AnalogError> {
        let t = self.state.time + h;
        let (a, b) = self.assemble(open, Some(h), t, &[]);
        let reuse = matches!(&self.cached, Some((o, ch, _)) if o == open && *ch == h);
        if !reuse {
            self.cached = Some((open.to_vec(), h, a.lu()));
        }
        let lu = &self.cached.as_ref().unwrap().2;
        let x = lu
            .solve(&b)
            .ok_or(AnalogError::NonConvergence { time: t })?;
        let mut p = self.state.pressure.clone();
        // The exact solution is a positive combination of rail, source and
        // previous pressures; clamping only removes LU rounding.
        for (k, &node) in self.net.free.iter().enumerate() {
            p[node] = x[k].clamp(self.params.p_vac, 0.0);
        }
        for s in &self.sources {
            p[s.node] = s.value(t, self.params.slew);
        }
        Ok(p)
    }

    /// Valves whose gate pressure in `p` crosses their switching threshold.
    fn crossings(&self, p: &[f64]) -> Vec<usize> {
        self.net
            .valves
            .iter()
            .enumerate()
            .filter(|(k, v)| {
                let g = p[v.gate];
                if self.state.open[*k] {
                    g >= self.params.p_close
                } else {
                    g <= self.params.p_open
                }
            })
            .map(|(k, _)| k)
            .collect()
    }

    /// Advances by at most `h_max`. When a valve threshold is crossed the
    /// step is shortened by bisection to the crossing (within `h/100`) and
    /// the valve switches at its end.
    pub fn step(&mut self, h_max: f64) -> Result<(), AnalogError> {
        let open = self.state.open.clone();
        let mut h = h_max;
        let mut p = self.solve(&open, h)?;
        let mut crossed = self.crossings(&p);
        if !crossed.is_empty() {
            let tol = self.params.h / 100.0;
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let pm = self.solve(&open, mid)?;
                let c = self.crossings(&pm);
                if c.is_empty() {
                    lo = mid;
                } else {
                    hi = mid;
                    p = pm;
                    crossed = c;
                }
            }
            if hi != h {
                h = hi;
            }
        }
        self.state.time += h;
        self.state.pressure = p;
        for k in crossed {
            self.state.open[k] = !self.state.open[k];
            self.valve_events.push(ValveEvent {
                time: self.state.time,
                valve: self.net.valves[k].name.clone(),
                open: self.state.open[k],
            });
        }
        Ok(())
    }

    fn recorded_nets(&self) -> Vec<usize> {
        (2..self.net.names.len()).collect()
    }
}

/// Runs until `until` stimulus units and thresholds the result.
pub fn run_analog(
    netlist: &Netlist,
    stim: &Stimulus,
    params: &AnalogParams,
    until: u64,
) -> Result<AnalogRun, AnalogError> {
    let mut sim = AnalogSim::new(netlist, stim, params, until)?;
    let end = until as f64 * stim.timescale;
    let nets = sim.recorded_nets();
    let mut analog = AnalogTrace {
        nets: nets.iter().map(|&i| sim.net.names[i].clone()).collect(),
        ..Default::default()
    };
    let record = |sim: &AnalogSim, analog: &mut AnalogTrace| {
        analog.times.push(sim.state.time);
        analog
            .samples
            .push(nets.iter().map(|&i| sim.state.pressure[i]).collect());
    };
    record(&sim, &mut analog);
    let mut steps = 0usize;
    while sim.state.time < end - 1e-12 {
        let h = params.h.min(end - sim.state.time);
        sim.step(h)?;
        steps += 1;
        if steps.is_multiple_of(params.stride) || sim.state.time >= end - 1e-12 {
            record(&sim, &mut analog);
        }
    }

    let driven = stim.driven_nets();
    let mut logic = Trace::new(until);
    logic.stimulus_nets = driven.clone();
    for e in stim.expand(until) {
        logic.record(&e.net, e.time, LogicLevel::from_bool(e.level));
    }
    for (i, name) in analog.nets.iter().enumerate() {
        if driven.contains(name) {
            continue;
        }
        for (t, s) in analog.times.iter().zip(&analog.samples) {
            let unit = ((t / stim.timescale) + 1e-9).floor() as u64;
            logic.record(name, unit.min(until), params.classify(s[i]));
        }
    }
    Ok(AnalogRun {
        analog,
        logic,
        valve_events: sim.valve_events,
        timescale: stim.timescale,
    })
}
