//! Compiler and simulators for vacuum-driven fluidic logic.

pub mod analog;
pub mod export;
pub mod fsm;
pub mod hexapod;
pub mod level;
pub mod logic;
pub mod netlist;
pub mod span;
pub mod stimulus;
pub mod synth;
pub mod syntax;

pub use level::LogicLevel;
pub use span::SourceSpan;
