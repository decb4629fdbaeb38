//! Waveform, schematic and data exporters. Output is deterministic.

mod dot;
mod vcd;

pub use dot::{cell_dot, write_dot};
pub use vcd::{analog_vcd, logic_vcd, vcd_id, write_vcd, VcdError, VcdSignal, MAX_VCD_VARS, VCD_VERSION};

use serde::Serialize;

use crate::analog::AnalogTrace;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// `time_s` then one column per net, one row per sample.
pub fn analog_csv(trace: &AnalogTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("time_s").chain(trace.nets.iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (t, row) in trace.times.iter().zip(&trace.samples) {
        let rec: Vec<String> = std::iter::once(t).chain(row).map(f64::to_string).collect();
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
