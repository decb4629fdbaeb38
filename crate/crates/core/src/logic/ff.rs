use serde::Serialize;

use crate::level::LogicLevel;
use crate::netlist::EdgeMode;

/// Combinational primitives understood by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GateKind {
    Not,
    Nand(usize),
    /// Valved OR and lossless junctions.
    Or(usize),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            GateKind::Nand(n) | GateKind::Or(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} expects {expected} inputs, got {got}")]
pub struct ArityMismatch {
    pub kind: GateKind,
    pub expected: usize,
    pub got: usize,
}

/// NOT negates; NAND is 0-dominant (any L0 gives L1); OR is 1-dominant.
pub fn eval_gate(kind: GateKind, inputs: &[LogicLevel]) -> Result<LogicLevel, ArityMismatch> {
    if inputs.len() != kind.arity() || inputs.is_empty() {
        return Err(ArityMismatch {
            kind,
            expected: kind.arity(),
            got: inputs.len(),
        });
    }
    use LogicLevel::*;
    Ok(match kind {
        GateKind::Not => !inputs[0],
        GateKind::Nand(_) => {
            if inputs.contains(&L0) {
                L1
            } else if inputs.iter().all(|&l| l == L1) {
                L0
            } else {
                LX
            }
        }
        GateKind::Or(_) => {
            if inputs.contains(&L1) {
                L1
            } else if inputs.iter().all(|&l| l == L0) {
                L0
            } else {
                LX
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Rising,
    Falling,
}

impl Edge {
    /// Edge between two clock levels, if both are known and differ.
    pub fn between(old: LogicLevel, new: LogicLevel) -> Option<Edge> {
        match (old, new) {
            (LogicLevel::L0, LogicLevel::L1) => Some(Edge::Rising),
            (LogicLevel::L1, LogicLevel::L0) => Some(Edge::Falling),
            _ => None,
        }
    }

    pub fn selected_by(self, mode: EdgeMode) -> bool {
        matches!(
            (mode, self),
            (EdgeMode::Both, _) | (EdgeMode::Rising, Edge::Rising) | (EdgeMode::Falling, Edge::Falling)
        )
    }
}

/// Behavioral flip-flop flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfKind {
    T,
    Jk,
}

/// Next state of a behavioral flip-flop at a clock edge. `inputs` is `[T]`
/// or `[J, K]`. Unselected edges hold the state.
pub fn update_ff(
    kind: FfKind,
    mode: EdgeMode,
    edge: Edge,
    inputs: &[LogicLevel],
    q: LogicLevel,
) -> LogicLevel {
    use LogicLevel::*;
    if !edge.selected_by(mode) {
        return q;
    }
    match kind {
        FfKind::T => match inputs[0] {
            L0 => q,
            L1 => !q,
            LX => LX,
        },
        FfKind::Jk => match (inputs[0], inputs[1]) {
            (L0, L0) => q,
            (L0, L1) => L0,
            (L1, L0) => L1,
            (L1, L1) => !q,
            _ => LX,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicLevel::*;

    #[test]
    fn gate_truth_tables() {
        assert_eq!(eval_gate(GateKind::Not, &[L1]).unwrap(), L0);
        assert_eq!(eval_gate(GateKind::Nand(2), &[L0, LX]).unwrap(), L1);
        assert_eq!(eval_gate(GateKind::Nand(3), &[L1, L1, L1]).unwrap(), L0);
        assert_eq!(eval_gate(GateKind::Nand(2), &[L1, LX]).unwrap(), LX);
        assert_eq!(eval_gate(GateKind::Or(2), &[L1, LX]).unwrap(), L1);
        assert!(eval_gate(GateKind::Nand(3), &[L1, L1]).is_err());
    }

    #[test]
    fn tff_both_edges_alternates() {
        let mut q = L0;
        let mut seq = Vec::new();
        for i in 0..4 {
            let edge = if i % 2 == 0 { Edge::Rising } else { Edge::Falling };
            q = update_ff(FfKind::T, EdgeMode::Both, edge, &[L1], q);
            seq.push(q);
        }
        assert_eq!(seq, vec![L1, L0, L1, L0]);
    }

    #[test]
    fn tff_hold_and_edge_selection() {
        for e in [Edge::Rising, Edge::Falling] {
            assert_eq!(update_ff(FfKind::T, EdgeMode::Both, e, &[L0], L1), L1);
        }
        assert_eq!(update_ff(FfKind::T, EdgeMode::Rising, Edge::Falling, &[L1], L0), L0);
    }

    #[test]
    fn jk_rows() {
        for q in [L0, L1] {
            assert_eq!(update_ff(FfKind::Jk, EdgeMode::Rising, Edge::Rising, &[L1, L0], q), L1);
            assert_eq!(update_ff(FfKind::Jk, EdgeMode::Rising, Edge::Rising, &[L0, L1], q), L0);
            assert_eq!(update_ff(FfKind::Jk, EdgeMode::Rising, Edge::Rising, &[L0, L0], q), q);
            assert_eq!(update_ff(FfKind::Jk, EdgeMode::Rising, Edge::Rising, &[L1, L1], q), !q);
        }
    }
}
