//! Timed input assignments and periodic clocks.

use serde::{Deserialize, Serialize};

/// One explicit assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimEvent {
    pub time: u64,
    pub net: String,
    pub level: bool,
}

/// Periodic square wave. The net rests at `start` until `phase`, then
/// spends `duty·period` units at the opposite level at the beginning of
/// every period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockDef {
    pub net: String,
    pub period: u64,
    pub duty: f64,
    pub phase: u64,
    pub start: bool,
}

impl ClockDef {
    /// Units spent at the active level per period, kept within the period.
    pub fn active_units(&self) -> u64 {
        ((self.duty * self.period as f64).round() as u64).clamp(1, self.period.saturating_sub(1).max(1))
    }

    /// Level changes in `[0, until]`, including the resting level at 0.
    pub fn edges(&self, until: u64) -> Vec<(u64, bool)> {
        let mut out = Vec::new();
        if self.phase > 0 {
            out.push((0, self.start));
        }
        let high = self.active_units();
        let mut t = self.phase;
        while t <= until {
            out.push((t, !self.start));
            if t + high <= until {
                out.push((t + high, self.start));
            }
            t += self.period;
        }
        if out.is_empty() {
            out.push((0, self.start));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    /// Seconds per time unit.
    pub timescale: f64,
    pub events: Vec<StimEvent>,
    pub clocks: Vec<ClockDef>,
    /// Nets forced to a level at time 0 (power-up state).
    pub inits: Vec<(String, bool)>,
    pub end_time: Option<u64>,
}

impl Default for Stimulus {
    fn default() -> Self {
        Self {
            timescale: 1e-3,
            events: Vec::new(),
            clocks: Vec::new(),
            inits: Vec::new(),
            end_time: None,
        }
    }
}

impl Stimulus {
    pub fn event(mut self, time: u64, net: &str, level: bool) -> Self {
        self.events.push(StimEvent {
            time,
            net: net.into(),
            level,
        });
        self
    }

    pub fn clock(mut self, clock: ClockDef) -> Self {
        self.clocks.push(clock);
        self
    }

    pub fn init(mut self, net: &str, level: bool) -> Self {
        self.inits.push((net.into(), level));
        self
    }

    pub fn until(mut self, end: u64) -> Self {
        self.end_time = Some(end);
        self
    }

    /// Nets driven by events or clocks, in first-mention order.
    pub fn driven_nets(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for n in self
            .events
            .iter()
            .map(|e| &e.net)
            .chain(self.clocks.iter().map(|c| &c.net))
        {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
        out
    }

    /// Every level change up to `until`, clocks materialized, sorted by
    /// time then net. Later explicit events win over clocks and earlier
    /// events on the same net and instant.
    pub fn expand(&self, until: u64) -> Vec<StimEvent> {
        let mut all: Vec<(u64, usize, StimEvent)> = Vec::new();
        for c in &self.clocks {
            for (t, level) in c.edges(until) {
                all.push((
                    t,
                    0,
                    StimEvent {
                        time: t,
                        net: c.net.clone(),
                        level,
                    },
                ));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.time <= until {
                all.push((e.time, i + 1, e.clone()));
            }
        }
        all.sort_by(|a, b| (a.0, &a.2.net, a.1).cmp(&(b.0, &b.2.net, b.1)));
        let mut out: Vec<StimEvent> = Vec::with_capacity(all.len());
        for (_, _, e) in all {
            if let Some(last) = out.last_mut() {
                if last.time == e.time && last.net == e.net {
                    *last = e;
                    continue;
                }
            }
            out.push(e);
        }
        out
    }

    /// Piecewise-constant level of `net` at `t`, if driven by then.
    pub fn level_at(&self, net: &str, t: u64) -> Option<bool> {
        self.expand(t)
            .into_iter().rfind(|e| e.net == net)
            .map(|e| e.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_edges_with_phase() {
        let c = ClockDef {
            net: "clk".into(),
            period: 6,
            duty: 0.5,
            phase: 2,
            start: false,
        };
        assert_eq!(
            c.edges(14),
            vec![(0, false), (2, true), (5, false), (8, true), (11, false), (14, true)]
        );
    }

    #[test]
    fn expand_merges_and_overrides() {
        let s = Stimulus::default()
            .event(0, "x", false)
            .event(10, "x", true)
            .event(10, "x", false)
            .clock(ClockDef {
                net: "clk".into(),
                period: 6,
                duty: 0.5,
                phase: 0,
                start: false,
            });
        let ev = s.expand(12);
        assert_eq!(ev[0].net, "clk");
        assert!(ev.iter().any(|e| e.time == 10 && e.net == "x" && !e.level));
        assert_eq!(ev.iter().filter(|e| e.time == 10).count(), 1);
        assert_eq!(s.level_at("clk", 4), Some(false));
        assert_eq!(s.level_at("clk", 6), Some(true));
        assert_eq!(s.driven_nets(), vec!["x", "clk"]);
    }
}
