use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::level::LogicLevel;

/// Per-net change lists. Each list starts at time 0 and has strictly
/// increasing times; `stimulus_nets` names the externally driven nets whose
/// changes open settle windows during comparison.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub end: u64,
    pub signals: IndexMap<String, Vec<(u64, LogicLevel)>>,
    pub stimulus_nets: Vec<String>,
}

impl Trace {
    pub fn new(end: u64) -> Self {
        Self {
            end,
            ..Default::default()
        }
    }

    /// Declares a net with its level at time 0.
    pub fn declare(&mut self, net: &str, initial: LogicLevel) {
        self.signals.entry(net.to_string()).or_insert_with(|| vec![(0, initial)]);
    }

    /// Appends a change, merging same-time writes and dropping no-ops. The
    /// first record of an undeclared net is placed at time 0 as LX when
    /// `t > 0`.
    pub fn record(&mut self, net: &str, t: u64, level: LogicLevel) {
        let list = self.signals.entry(net.to_string()).or_default();
        if list.is_empty() && t > 0 {
            list.push((0, LogicLevel::LX));
        }
        if let Some(last) = list.last_mut() {
            debug_assert!(t >= last.0, "trace time went backwards on {net}");
            if last.0 == t {
                last.1 = level;
                let n = list.len();
                if n >= 2 && list[n - 2].1 == level {
                    list.pop();
                }
                return;
            }
            if last.1 == level {
                return;
            }
        }
        list.push((t, level));
    }

    pub fn changes(&self, net: &str) -> &[(u64, LogicLevel)] {
        self.signals.get(net).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn has(&self, net: &str) -> bool {
        self.signals.contains_key(net)
    }

    /// Level in force at `t`.
    pub fn level_at(&self, net: &str, t: u64) -> Option<LogicLevel> {
        let list = self.signals.get(net)?;
        let i = list.partition_point(|&(ct, _)| ct <= t);
        Some(if i == 0 { LogicLevel::LX } else { list[i - 1].1 })
    }

    /// Times at which `net` changes to `level`, excluding the initial entry.
    pub fn edges_to(&self, net: &str, level: LogicLevel) -> Vec<u64> {
        self.changes(net)
            .iter()
            .skip(1)
            .filter(|c| c.1 == level)
            .map(|c| c.0)
            .collect()
    }

    /// Copy restricted to the named nets (others dropped).
    pub fn select(&self, nets: &[&str]) -> Trace {
        let mut out = Trace::new(self.end);
        for n in nets {
            if let Some(v) = self.signals.get(*n) {
                out.signals.insert(n.to_string(), v.clone());
            }
        }
        out.stimulus_nets = self
            .stimulus_nets
            .iter()
            .filter(|s| nets.contains(&s.as_str()))
            .cloned()
            .collect();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicLevel::*;

    #[test]
    fn record_merges_and_skips() {
        let mut t = Trace::new(10);
        t.record("a", 0, LX);
        t.record("a", 0, L0);
        t.record("a", 3, L0);
        t.record("a", 5, L1);
        t.record("a", 5, L0);
        t.record("a", 7, L1);
        assert_eq!(t.changes("a"), &[(0, L0), (7, L1)]);
        assert_eq!(t.level_at("a", 6), Some(L0));
        assert_eq!(t.level_at("a", 7), Some(L1));
        assert_eq!(t.level_at("b", 7), None);
        t.record("late", 4, L1);
        assert_eq!(t.changes("late"), &[(0, LX), (4, L1)]);
    }
}
