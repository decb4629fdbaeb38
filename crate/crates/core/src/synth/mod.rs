//! FSM synthesis: state encoding, T-excitation, exact minimization and
//! NAND-NAND mapping onto the cell library.

mod excite;
mod map;
mod qm;
mod table;

use serde::Serialize;

pub use crate::fsm::{encode_states, StateEncoding};
pub use excite::{derive_t_excitation, output_tables, variable_names};
pub use map::{map_to_gates, FlipFlopStyle, MapError, MapOptions};
pub use qm::{minimize, prime_implicants, MinimizeError, MAX_EXACT_VARS};
pub use table::{CoverExpr, Cube, TableError, TruthTable, TtValue, MAX_TABLE_VARS};

use crate::fsm::{bit_net, FsmError, FsmSpec};
use crate::netlist::Netlist;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid state machine: {0}")]
    Fsm(#[from] FsmError),
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Everything produced along the way, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct Synthesis {
    pub encoding: StateEncoding,
    pub variables: Vec<String>,
    /// `(signal, cover)` for each state bit's T input, then each output.
    pub covers: Vec<(String, CoverExpr)>,
    #[serde(skip)]
    pub netlist: Netlist,
}

pub fn synthesize(spec: &FsmSpec, opts: &MapOptions) -> Result<Synthesis, SynthError> {
    spec.check()?;
    let enc = encode_states(spec);
    let t_covers = derive_t_excitation(spec, &enc)
        .iter()
        .map(minimize)
        .collect::<Result<Vec<_>, _>>()?;
    let out_covers = output_tables(spec, &enc)
        .iter()
        .map(minimize)
        .collect::<Result<Vec<_>, _>>()?;
    let netlist = map_to_gates(&t_covers, &out_covers, spec, &enc, opts)?;
    let covers = t_covers
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("T_{}", bit_net(enc.bits, i)), c.clone()))
        .chain(spec.outputs.iter().cloned().zip(out_covers.iter().cloned()))
        .collect();
    Ok(Synthesis {
        variables: variable_names(spec, &enc),
        encoding: enc,
        covers,
        netlist,
    })
}
