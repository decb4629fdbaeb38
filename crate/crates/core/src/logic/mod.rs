//! Three-valued event-driven simulation of gate-level netlists.

mod compare;
mod ff;
mod sim;
mod trace;

pub use compare::{compare_traces, settle_windows, CompareError, Divergence, TraceMatch};
pub use ff::{eval_gate, update_ff, ArityMismatch, Edge, FfKind, GateKind};
pub use sim::{simulate, Delays, SimError, SimOptions};
pub use trace::Trace;
