//! Lumped RC simulation at valve level.

mod network;
mod params;
mod sim;
mod timing;

pub use network::{AnalogError, JunctionInfo, Network, NodeRole, ValveInfo};
pub use params::{AnalogParams, PARAM_KEYS};
pub use sim::{run_analog, AnalogRun, AnalogSim, AnalogState, AnalogTrace, ValveEvent};
pub use timing::{timing_report, transitions, Direction, NetTiming, Transition};
