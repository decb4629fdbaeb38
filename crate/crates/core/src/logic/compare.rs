use std::collections::BTreeSet;

use serde::Serialize;

use super::Trace;
use crate::level::LogicLevel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("net `{net}` missing from the {side} trace")]
    MissingNet { net: String, side: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub net: String,
    pub time: u64,
    pub left: LogicLevel,
    pub right: LogicLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TraceMatch {
    Equal,
    Diverges(Divergence),
}

impl TraceMatch {
    pub fn is_equal(&self) -> bool {
        matches!(self, TraceMatch::Equal)
    }
}

/// Half-open intervals `[t, t + settle)` after every change of a stimulus
/// net of either trace.
pub fn settle_windows(a: &Trace, b: &Trace, settle: u64) -> Vec<(u64, u64)> {
    let mut starts = BTreeSet::new();
    for tr in [a, b] {
        for net in &tr.stimulus_nets {
            starts.extend(tr.changes(net).iter().map(|c| c.0));
        }
    }
    starts.into_iter().map(|t| (t, t + settle)).collect()
}

/// Compares `nets` at every change point and window end up to the shorter
/// trace's end, skipping instants inside settle windows.
pub fn compare_traces(
    a: &Trace,
    b: &Trace,
    nets: &[&str],
    settle: u64,
) -> Result<TraceMatch, CompareError> {
    for net in nets {
        for (tr, side) in [(a, "left"), (b, "right")] {
            if !tr.has(net) {
                return Err(CompareError::MissingNet {
                    net: net.to_string(),
                    side,
                });
            }
        }
    }
    let end = a.end.min(b.end);
    let windows = settle_windows(a, b, settle);
    let in_window = |t: u64| windows.iter().any(|&(s, e)| t >= s && t < e);

    let mut points = BTreeSet::new();
    points.insert(0);
    points.extend(windows.iter().map(|w| w.1));
    for net in nets {
        for tr in [a, b] {
            points.extend(tr.changes(net).iter().map(|c| c.0));
        }
    }
    for t in points.into_iter().take_while(|&t| t <= end) {
        if in_window(t) {
            continue;
        }
        for net in nets {
            let left = a.level_at(net, t).unwrap_or(LogicLevel::LX);
            let right = b.level_at(net, t).unwrap_or(LogicLevel::LX);
            if left != right {
                return Ok(TraceMatch::Diverges(Divergence {
                    net: net.to_string(),
                    time: t,
                    left,
                    right,
                }));
            }
        }
    }
    Ok(TraceMatch::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicLevel::*;

    fn trace(changes: &[(u64, LogicLevel)], x: &[(u64, LogicLevel)]) -> Trace {
        let mut t = Trace::new(20);
        for &(time, l) in changes {
            t.record("q", time, l);
        }
        for &(time, l) in x {
            t.record("x", time, l);
        }
        t.stimulus_nets = vec!["x".into()];
        t
    }

    #[test]
    fn identical_traces_are_equal() {
        let a = trace(&[(0, L0), (5, L1)], &[(0, L0)]);
        assert!(compare_traces(&a, &a, &["q", "x"], 0).unwrap().is_equal());
    }

    #[test]
    fn differences_inside_windows_are_ignored() {
        let a = trace(&[(0, L0), (5, L1)], &[(0, L0), (4, L1)]);
        let b = trace(&[(0, L0), (6, L1)], &[(0, L0), (4, L1)]);
        assert!(compare_traces(&a, &b, &["q"], 3).unwrap().is_equal());
        match compare_traces(&a, &b, &["q"], 1).unwrap() {
            TraceMatch::Diverges(d) => assert_eq!((d.time, d.left, d.right), (5, L1, L0)),
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn persistent_difference_is_caught_at_window_end() {
        let a = trace(&[(0, L0), (5, L1)], &[(0, L0), (4, L1)]);
        let b = trace(&[(0, L0)], &[(0, L0), (4, L1)]);
        match compare_traces(&a, &b, &["q"], 3).unwrap() {
            TraceMatch::Diverges(d) => assert_eq!(d.time, 7),
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn missing_net() {
        let a = trace(&[(0, L0)], &[]);
        assert!(compare_traces(&a, &a, &["nope"], 0).is_err());
    }
}
