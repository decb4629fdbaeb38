use serde::Serialize;

use super::sim::AnalogTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Toward vacuum.
    Fall,
    /// Toward atmosphere.
    Rise,
}

/// One completed swing between the 10% and 90% pressure levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub start: f64,
    pub end: f64,
    pub direction: Direction,
}

impl Transition {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetTiming {
    pub net: String,
    pub transitions: Vec<Transition>,
}

/// Time at which the segment `(t0, p0)..(t1, p1)` crosses `level`.
fn cross(t0: f64, p0: f64, t1: f64, p1: f64, level: f64) -> f64 {
    if p1 == p0 {
        t1
    } else {
        t0 + (level - p0) * (t1 - t0) / (p1 - p0)
    }
}

/// 10–90% transitions of `series`, measured at `0.1·p_vac` and `0.9·p_vac`
/// with linear interpolation between samples.
pub fn transitions(series: &[(f64, f64)], p_vac: f64) -> Vec<Transition> {
    let shallow = 0.1 * p_vac;
    let deep = 0.9 * p_vac;
    let mut out = Vec::new();
    // Last crossing out of a rail band: (time, heading toward vacuum).
    let mut pending: Option<(f64, Direction)> = None;
    for w in series.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        if p0 > shallow && p1 <= shallow {
            pending = Some((cross(t0, p0, t1, p1, shallow), Direction::Fall));
        }
        if p0 < deep && p1 >= deep {
            pending = Some((cross(t0, p0, t1, p1, deep), Direction::Rise));
        }
        if p0 > deep && p1 <= deep {
            if let Some((start, Direction::Fall)) = pending.take() {
                out.push(Transition {
                    start,
                    end: cross(t0, p0, t1, p1, deep),
                    direction: Direction::Fall,
                });
            }
        }
        if p0 < shallow && p1 >= shallow {
            if let Some((start, Direction::Rise)) = pending.take() {
                out.push(Transition {
                    start,
                    end: cross(t0, p0, t1, p1, shallow),
                    direction: Direction::Rise,
                });
            }
        }
    }
    out
}

/// Per-net transition list. Nets that never complete a swing are omitted.
pub fn timing_report(trace: &AnalogTrace, p_vac: f64) -> Vec<NetTiming> {
    trace
        .nets
        .iter()
        .filter_map(|net| {
            let t = transitions(&trace.series(net)?, p_vac);
            (!t.is_empty()).then(|| NetTiming {
                net: net.clone(),
                transitions: t,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fall_has_ln9_rise_time() {
        let tau = 0.05;
        let series: Vec<(f64, f64)> = (0..4000)
            .map(|k| {
                let t = k as f64 * 1e-4;
                (t, -8e4 * (1.0 - (-t / tau).exp()))
            })
            .collect();
        let tr = transitions(&series, -8e4);
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].direction, Direction::Fall);
        assert!((tr[0].duration() - tau * 9f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn incomplete_swing_is_ignored() {
        let series = vec![(0.0, 0.0), (1.0, -4e4), (2.0, 0.0)];
        assert!(transitions(&series, -8e4).is_empty());
    }
}
