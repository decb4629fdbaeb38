use super::table::{TruthTable, TtValue};
use crate::fsm::{bit_net, FsmSpec, StateEncoding};

/// Truth-table variable names: state bits first, then inputs.
pub fn variable_names(spec: &FsmSpec, enc: &StateEncoding) -> Vec<String> {
    (0..enc.bits)
        .map(|i| bit_net(enc.bits, i))
        .chain(spec.inputs.iter().cloned())
        .collect()
}

fn table_vars(spec: &FsmSpec, enc: &StateEncoding) -> usize {
    enc.bits + spec.inputs.len()
}

/// Splits a row into (state code, input vector).
fn split(row: u32, bits: usize) -> (u32, u32) {
    (row & ((1 << bits) - 1), row >> bits)
}

/// One table per state bit: `T_i = Q_i xor Q_i'`, with unassigned state
/// codes as don't-cares.
pub fn derive_t_excitation(spec: &FsmSpec, enc: &StateEncoding) -> Vec<TruthTable> {
    let vars = table_vars(spec, enc);
    (0..enc.bits)
        .map(|i| {
            TruthTable::from_fn(vars, |row| {
                let (code, inputs) = split(row, enc.bits);
                match enc.state_of_code(code) {
                    None => TtValue::DontCare,
                    Some(s) => {
                        let next = enc.codes[spec.next_state(s, inputs)];
                        TtValue::from(((code ^ next) >> i) & 1 == 1)
                    }
                }
            })
        })
        .collect()
}

/// One table per output over the same variables.
pub fn output_tables(spec: &FsmSpec, enc: &StateEncoding) -> Vec<TruthTable> {
    let vars = table_vars(spec, enc);
    (0..spec.outputs.len())
        .map(|o| {
            TruthTable::from_fn(vars, |row| {
                let (code, inputs) = split(row, enc.bits);
                match enc.state_of_code(code) {
                    None => TtValue::DontCare,
                    Some(s) => TtValue::from(spec.outputs(enc, s, inputs)[o]),
                }
            })
        })
        .collect()
}
