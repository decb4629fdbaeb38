use std::fmt::Write;

use crate::analog::AnalogRun;
use crate::level::LogicLevel;
use crate::logic::Trace;

pub const VCD_VERSION: &str = "fluidic vcd writer 1";
/// Identifier space: one or two printable characters.
pub const MAX_VCD_VARS: usize = 94 * 94;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcdError {
    #[error("{0} variables exceed the identifier space of {MAX_VCD_VARS}")]
    TooManyVariables(usize),
    #[error("trace has no signal `{0}`")]
    UnknownSignal(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VcdSignal {
    Logic {
        name: String,
        changes: Vec<(u64, LogicLevel)>,
    },
    Real {
        name: String,
        changes: Vec<(u64, f64)>,
    },
}

impl VcdSignal {
    fn name(&self) -> &str {
        match self {
            VcdSignal::Logic { name, .. } | VcdSignal::Real { name, .. } => name,
        }
    }
}

/// Identifier of the `i`-th variable: `!`..`~`, then two characters.
pub fn vcd_id(i: usize) -> String {
    let c = |k: usize| char::from(b'!' + k as u8);
    if i < 94 {
        c(i).to_string()
    } else {
        let j = i - 94;
        format!("{}{}", c(j / 94 % 94), c(j % 94))
    }
}

fn value(sig: &VcdSignal, k: usize, id: &str) -> String {
    match sig {
        VcdSignal::Logic { changes, .. } => format!("{}{id}", changes[k].1.vcd_char()),
        VcdSignal::Real { changes, .. } => format!("r{} {id}", changes[k].1),
    }
}

fn initial(sig: &VcdSignal, id: &str) -> String {
    match sig {
        VcdSignal::Logic { changes, .. } => match changes.first() {
            Some(&(0, l)) => format!("{}{id}", l.vcd_char()),
            _ => format!("x{id}"),
        },
        VcdSignal::Real { changes, .. } => match changes.first() {
            Some(&(0, p)) => format!("r{p} {id}"),
            _ => format!("r0 {id}"),
        },
    }
}

/// Writes a complete dump. Changes must be sorted by time; the last of
/// several changes at one time wins and repeated values are dropped.
pub fn write_vcd(timescale: &str, scope: &str, signals: &[VcdSignal]) -> Result<String, VcdError> {
    if signals.len() > MAX_VCD_VARS {
        return Err(VcdError::TooManyVariables(signals.len()));
    }
    let ids: Vec<String> = (0..signals.len()).map(vcd_id).collect();
    let mut out = String::new();
    let _ = writeln!(out, "$version {VCD_VERSION} $end");
    let _ = writeln!(out, "$timescale {timescale} $end");
    let _ = writeln!(out, "$scope module {scope} $end");
    for (sig, id) in signals.iter().zip(&ids) {
        let (kind, width) = match sig {
            VcdSignal::Logic { .. } => ("wire", 1),
            VcdSignal::Real { .. } => ("real", 64),
        };
        let _ = writeln!(out, "$var {kind} {width} {id} {} $end", sig.name());
    }
    out.push_str("$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n");
    let mut last: Vec<String> = Vec::with_capacity(signals.len());
    for (sig, id) in signals.iter().zip(&ids) {
        let v = initial(sig, id);
        let _ = writeln!(out, "{v}");
        last.push(v);
    }
    out.push_str("$end\n");

    // (time, signal, change index); later entries at the same time win.
    let mut records: Vec<(u64, usize, usize)> = Vec::new();
    for (s, sig) in signals.iter().enumerate() {
        let times: Vec<u64> = match sig {
            VcdSignal::Logic { changes, .. } => changes.iter().map(|c| c.0).collect(),
            VcdSignal::Real { changes, .. } => changes.iter().map(|c| c.0).collect(),
        };
        for (k, &t) in times.iter().enumerate() {
            if t == 0 {
                continue;
            }
            if times.get(k + 1) == Some(&t) {
                continue;
            }
            records.push((t, s, k));
        }
    }
    records.sort_unstable();
    let mut current = 0;
    for (t, s, k) in records {
        let v = value(&signals[s], k, &ids[s]);
        if v == last[s] {
            continue;
        }
        if t != current {
            let _ = writeln!(out, "#{t}");
            current = t;
        }
        let _ = writeln!(out, "{v}");
        last[s] = v;
    }
    Ok(out)
}

/// Logic trace as 1-bit wires; `vars` empty selects every signal.
pub fn logic_vcd(trace: &Trace, vars: &[&str]) -> Result<String, VcdError> {
    let names: Vec<&str> = if vars.is_empty() {
        trace.signals.keys().map(String::as_str).collect()
    } else {
        vars.to_vec()
    };
    let signals = names
        .into_iter()
        .map(|n| {
            if !trace.has(n) {
                return Err(VcdError::UnknownSignal(n.to_string()));
            }
            Ok(VcdSignal::Logic {
                name: n.to_string(),
                changes: trace.changes(n).to_vec(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_vcd("1ns", "top", &signals)
}

/// Stimulus nets as wires and the remaining nets as real pressures, on a
/// 1 ms grid. `vars` empty selects every net.
pub fn analog_vcd(run: &AnalogRun, vars: &[&str]) -> Result<String, VcdError> {
    let a = &run.analog;
    let names: Vec<&str> = if vars.is_empty() {
        run.logic
            .stimulus_nets
            .iter()
            .map(String::as_str)
            .chain(a.nets.iter().map(String::as_str).filter(|n| !run.logic.stimulus_nets.iter().any(|s| s == n)))
            .collect()
    } else {
        vars.to_vec()
    };
    let mut signals = Vec::new();
    for n in names {
        if run.logic.stimulus_nets.iter().any(|s| s == n) {
            signals.push(VcdSignal::Logic {
                name: n.to_string(),
                changes: run.logic.changes(n).to_vec(),
            });
            continue;
        }
        let i = a
            .net_index(n)
            .ok_or_else(|| VcdError::UnknownSignal(n.to_string()))?;
        let changes = a
            .times
            .iter()
            .zip(&a.samples)
            .map(|(t, s)| ((t * 1e3).round() as u64, s[i]))
            .collect();
        signals.push(VcdSignal::Real {
            name: n.to_string(),
            changes,
        });
    }
    write_vcd("1ms", "top", &signals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_are_sequential() {
        assert_eq!(vcd_id(0), "!");
        assert_eq!(vcd_id(93), "~");
        assert_eq!(vcd_id(94), "!!");
        assert_eq!(vcd_id(95), "!\"");
    }

    #[test]
    fn toggling_net() {
        let mut t = Trace::new(6);
        for (time, l) in [(0, LogicLevel::L0), (3, LogicLevel::L1), (6, LogicLevel::L0)] {
            t.record("a", time, l);
        }
        let v = logic_vcd(&t, &[]).unwrap();
        assert!(v.contains("#0\n$dumpvars\n0!\n$end\n#3\n1!\n#6\n0!\n"), "{v}");
    }

    #[test]
    fn empty_trace_dumps_unknowns() {
        let mut t = Trace::new(0);
        t.declare("a", LogicLevel::LX);
        let v = logic_vcd(&t, &[]).unwrap();
        assert!(v.ends_with("$dumpvars\nx!\n$end\n"), "{v}");
    }

    #[test]
    fn too_many_variables() {
        let sigs: Vec<VcdSignal> = (0..MAX_VCD_VARS + 1)
            .map(|i| VcdSignal::Logic {
                name: format!("n{i}"),
                changes: Vec::new(),
            })
            .collect();
        assert_eq!(
            write_vcd("1ns", "top", &sigs),
            Err(VcdError::TooManyVariables(MAX_VCD_VARS + 1))
        );
    }
}
