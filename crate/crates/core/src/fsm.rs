//! Finite-state-machine model and its reference interpreter.
//!
//! Inputs are packed into a `u32` with bit `j` holding input `j`. State codes
//! follow declaration order with the initial state forced to zero; the same
//! encoding names the state-bit nets (`Q` for one bit, `Q0`, `Q1`, ...
//! otherwise) used by synthesis and by Mealy expressions.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::level::LogicLevel;
use crate::logic::Trace;
use crate::span::SourceSpan;

pub const MAX_INPUTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub var: String,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        f.write_str(&self.var)
    }
}

/// Boolean expression over inputs, state names and state bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_vars(out)),
        }
    }

    pub fn eval(&self, lookup: &impl Fn(&str) -> bool) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => lookup(v),
            Expr::Not(e) => !e.eval(lookup),
            Expr::And(es) => es.iter().all(|e| e.eval(lookup)),
            Expr::Or(es) => es.iter().any(|e| e.eval(lookup)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Expr::Const(b) => write!(f, "{}", u8::from(*b)),
            Expr::Var(v) => f.write_str(v),
            Expr::Not(e) => {
                f.write_str("!")?;
                e.fmt_prec(f, 3)
            }
            Expr::And(es) | Expr::Or(es) => {
                let (op, my) = if matches!(self, Expr::And(_)) {
                    (" & ", 2)
                } else {
                    (" | ", 1)
                };
                if es.is_empty() {
                    return write!(f, "{}", u8::from(matches!(self, Expr::And(_))));
                }
                let paren = my < prec || es.len() == 1 && prec == 3;
                if paren {
                    f.write_str("(")?;
                }
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    e.fmt_prec(f, my + 1)?;
                }
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmState {
    pub name: String,
    /// Moore output assignments; unlisted outputs are 0.
    pub moore: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    /// Conjunction of input literals; empty means always.
    pub guard: Vec<Literal>,
    pub to: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FsmSpec {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub states: Vec<FsmState>,
    pub initial: String,
    pub transitions: Vec<Transition>,
    /// Outputs defined combinationally over state and inputs.
    pub mealy: IndexMap<String, Expr>,
    /// Missing (state, input) combinations stay in place instead of being
    /// an error.
    pub implicit_self_loops: bool,
    #[serde(skip)]
    pub spans: FsmSpans,
}

impl PartialEq for FsmSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.states == other.states
            && self.initial == other.initial
            && self.transitions == other.transitions
            && self.mealy == other.mealy
            && self.implicit_self_loops == other.implicit_self_loops
    }
}

/// Parser locations for diagnostics.
#[derive(Debug, Clone, Default)]
pub struct FsmSpans {
    pub header: Option<SourceSpan>,
    pub states: Vec<SourceSpan>,
    pub transitions: Vec<SourceSpan>,
    pub initial: Option<SourceSpan>,
    pub mealy: Vec<SourceSpan>,
}

/// Why an [`FsmSpec`] is not a valid machine. Indices refer to
/// `transitions`, `states` or `mealy` entries so callers can attach spans.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FsmError {
    #[error("{0}")]
    Declaration(String),
    #[error("initial state `{0}` is not declared")]
    UnknownInitial(String),
    #[error("transition references undeclared state `{state}`")]
    UnknownState { transition: usize, state: String },
    #[error("guard references undeclared input `{input}`")]
    UnknownInput { transition: usize, input: String },
    #[error("guard is contradictory ({0})")]
    ContradictoryGuard(usize),
    #[error("state `{state}` assigns unknown or Mealy output `{output}`")]
    BadMooreOutput { state: usize, output: String },
    #[error("Mealy output `{output}`: {reason}")]
    BadMealy { index: usize, output: String, reason: String },
    #[error("transitions from `{state}` overlap when {inputs}")]
    Nondeterministic {
        first: usize,
        second: usize,
        state: String,
        inputs: String,
    },
    #[error("state `{state}` has no transition when {inputs}")]
    Incomplete { state: String, inputs: String },
}

/// State assignment: `codes[i]` is the code of `states[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateEncoding {
    pub bits: usize,
    pub codes: Vec<u32>,
}

impl StateEncoding {
    pub fn state_of_code(&self, code: u32) -> Option<usize> {
        self.codes.iter().position(|&c| c == code)
    }
}

/// Net name of state bit `i`: `Q` for a single bit, `Q{i}` otherwise.
pub fn bit_net(bits: usize, i: usize) -> String {
    if bits == 1 {
        "Q".into()
    } else {
        format!("Q{i}")
    }
}

/// Net name of the complement of state bit `i`.
pub fn bit_net_bar(bits: usize, i: usize) -> String {
    format!("{}bar", bit_net(bits, i))
}

/// ⌈log2(n)⌉ bits; the initial state gets code 0 and the remaining states
/// take 1, 2, ... in declaration order.
pub fn encode_states(spec: &FsmSpec) -> StateEncoding {
    let n = spec.states.len();
    let bits = if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    };
    let init = spec.state_index(&spec.initial).unwrap_or(0);
    let mut next = 1u32;
    let codes = (0..n)
        .map(|i| {
            if i == init {
                0
            } else {
                let c = next;
                next += 1;
                c
            }
        })
        .collect();
    StateEncoding { bits, codes }
}

impl FsmSpec {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|s| s == name)
    }

    pub fn initial_index(&self) -> usize {
        self.state_index(&self.initial).unwrap_or(0)
    }

    pub fn encoding(&self) -> StateEncoding {
        encode_states(self)
    }

    fn guard_matches(&self, guard: &[Literal], inputs: u32) -> bool {
        guard.iter().all(|l| {
            let j = self.input_index(&l.var).expect("validated guard");
            ((inputs >> j) & 1 == 1) == l.positive
        })
    }

    /// The transition taken from `state` under `inputs`, if any.
    pub fn transition_for(&self, state: usize, inputs: u32) -> Option<usize> {
        let from = &self.states[state].name;
        self.transitions
            .iter()
            .position(|t| &t.from == from && self.guard_matches(&t.guard, inputs))
    }

    pub fn next_state(&self, state: usize, inputs: u32) -> usize {
        match self.transition_for(state, inputs) {
            Some(t) => self.state_index(&self.transitions[t].to).expect("validated"),
            None => state,
        }
    }

    /// Value of an identifier in a Mealy expression.
    fn lookup_var(&self, enc: &StateEncoding, state: usize, inputs: u32, var: &str) -> Option<bool> {
        if let Some(j) = self.input_index(var) {
            return Some((inputs >> j) & 1 == 1);
        }
        if let Some(s) = self.state_index(var) {
            return Some(s == state);
        }
        (0..enc.bits)
            .find(|&i| bit_net(enc.bits, i) == var)
            .map(|i| (enc.codes[state] >> i) & 1 == 1)
    }

    /// All output values in `outputs` order for the given state and inputs.
    pub fn outputs(&self, enc: &StateEncoding, state: usize, inputs: u32) -> Vec<bool> {
        self.outputs
            .iter()
            .map(|o| match self.mealy.get(o) {
                Some(e) => e.eval(&|v| self.lookup_var(enc, state, inputs, v).unwrap_or(false)),
                None => self.states[state].moore.get(o).copied().unwrap_or(false),
            })
            .collect()
    }

    fn describe_inputs(&self, inputs: u32) -> String {
        if self.inputs.is_empty() {
            return "always".into();
        }
        self.inputs
            .iter()
            .enumerate()
            .map(|(j, n)| format!("{n}={}", (inputs >> j) & 1))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Checks declarations, references, determinism and completeness. The
    /// last two are decided by evaluating every guard on every input
    /// combination.
    pub fn check(&self) -> Result<(), FsmError> {
        if self.inputs.len() > MAX_INPUTS {
            return Err(FsmError::Declaration(format!(
                "at most {MAX_INPUTS} inputs are supported"
            )));
        }
        let mut names: Vec<&str> = Vec::new();
        for n in self
            .inputs
            .iter()
            .chain(&self.outputs)
            .chain(self.states.iter().map(|s| &s.name))
        {
            if names.contains(&n.as_str()) {
                return Err(FsmError::Declaration(format!("name `{n}` declared twice")));
            }
            names.push(n);
        }
        if self.states.is_empty() {
            return Err(FsmError::Declaration("no states declared".into()));
        }
        if self.state_index(&self.initial).is_none() {
            return Err(FsmError::UnknownInitial(self.initial.clone()));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            for s in [&t.from, &t.to] {
                if self.state_index(s).is_none() {
                    return Err(FsmError::UnknownState {
                        transition: i,
                        state: s.clone(),
                    });
                }
            }
            for (k, l) in t.guard.iter().enumerate() {
                if self.input_index(&l.var).is_none() {
                    return Err(FsmError::UnknownInput {
                        transition: i,
                        input: l.var.clone(),
                    });
                }
                if t.guard[..k]
                    .iter()
                    .any(|m| m.var == l.var && m.positive != l.positive)
                {
                    return Err(FsmError::ContradictoryGuard(i));
                }
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            for o in s.moore.keys() {
                if !self.outputs.contains(o) || self.mealy.contains_key(o) {
                    return Err(FsmError::BadMooreOutput {
                        state: i,
                        output: o.clone(),
                    });
                }
            }
        }
        let enc = self.encoding();
        for (index, (o, e)) in self.mealy.iter().enumerate() {
            if !self.outputs.contains(o) {
                return Err(FsmError::BadMealy {
                    index,
                    output: o.clone(),
                    reason: "not a declared output".into(),
                });
            }
            for v in e.vars() {
                if self.lookup_var(&enc, 0, 0, v).is_none() {
                    return Err(FsmError::BadMealy {
                        index,
                        output: o.clone(),
                        reason: format!("unknown identifier `{v}`"),
                    });
                }
            }
        }

        let combos = 1u32 << self.inputs.len();
        let outgoing = |s: &FsmState| -> Vec<usize> {
            self.transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| t.from == s.name)
                .map(|(i, _)| i)
                .collect()
        };
        for s in &self.states {
            let out = outgoing(s);
            for inputs in 0..combos {
                let mut hit = out
                    .iter()
                    .copied()
                    .filter(|&t| self.guard_matches(&self.transitions[t].guard, inputs));
                if let (Some(first), Some(second)) = (hit.next(), hit.next()) {
                    return Err(FsmError::Nondeterministic {
                        first,
                        second,
                        state: s.name.clone(),
                        inputs: self.describe_inputs(inputs),
                    });
                }
            }
        }
        if !self.implicit_self_loops {
            for s in &self.states {
                let out = outgoing(s);
                for inputs in 0..combos {
                    if !out
                        .iter()
                        .any(|&t| self.guard_matches(&self.transitions[t].guard, inputs))
                    {
                        return Err(FsmError::Incomplete {
                            state: s.name.clone(),
                            inputs: self.describe_inputs(inputs),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// One interpreter step: the state entered and the outputs it produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsmStep {
    pub state: String,
    pub code: u32,
    pub outputs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsmRun {
    pub initial: String,
    pub steps: Vec<FsmStep>,
}

impl FsmRun {
    /// Code bit `bit` after each step.
    pub fn bit_sequence(&self, bit: usize) -> Vec<bool> {
        self.steps.iter().map(|s| (s.code >> bit) & 1 == 1).collect()
    }
}

/// Reference semantics: one transition per clock tick. Each step's outputs
/// are taken after the transition, with Mealy outputs evaluated on that
/// tick's inputs.
pub fn interpret_fsm(spec: &FsmSpec, inputs: &[u32]) -> FsmRun {
    let enc = spec.encoding();
    let mut state = spec.initial_index();
    let mut steps = Vec::with_capacity(inputs.len());
    for &x in inputs {
        state = spec.next_state(state, x);
        steps.push(FsmStep {
            state: spec.states[state].name.clone(),
            code: enc.codes[state],
            outputs: spec.outputs(&enc, state, x),
        });
    }
    FsmRun {
        initial: spec.initial.clone(),
        steps,
    }
}

/// Time-domain rendition of the interpreter. State advances at every time
/// in `ticks` using the inputs in force at that instant; outputs follow
/// state and inputs continuously. `inputs` lists input-vector changes and
/// should start at time 0. The trace carries the input nets (marked as
/// stimulus), every output, and the state-bit nets with their complements.
pub fn reference_trace(spec: &FsmSpec, ticks: &[u64], inputs: &[(u64, u32)], until: u64) -> Trace {
    let enc = spec.encoding();
    let mut trace = Trace::new(until);
    trace.stimulus_nets = spec.inputs.clone();
    let mut times: Vec<u64> = ticks
        .iter()
        .copied()
        .chain(inputs.iter().map(|p| p.0))
        .chain(std::iter::once(0))
        .filter(|&t| t <= until)
        .collect();
    times.sort_unstable();
    times.dedup();

    let mut state = spec.initial_index();
    let mut tick_iter = ticks.iter().copied().peekable();
    for t in times {
        let x = inputs
            .iter()
            .take_while(|p| p.0 <= t)
            .last()
            .map(|p| p.1)
            .unwrap_or(0);
        while let Some(&k) = tick_iter.peek() {
            if k > t {
                break;
            }
            tick_iter.next();
            if k == t {
                state = spec.next_state(state, x);
            }
        }
        for (j, name) in spec.inputs.iter().enumerate() {
            trace.record(name, t, LogicLevel::from_bool((x >> j) & 1 == 1));
        }
        for (o, v) in spec.outputs.iter().zip(spec.outputs(&enc, state, x)) {
            trace.record(o, t, LogicLevel::from_bool(v));
        }
        for i in 0..enc.bits {
            let b = (enc.codes[state] >> i) & 1 == 1;
            trace.record(&bit_net(enc.bits, i), t, LogicLevel::from_bool(b));
            trace.record(&bit_net_bar(enc.bits, i), t, LogicLevel::from_bool(!b));
        }
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: &str, positive: bool) -> Literal {
        Literal {
            var: v.into(),
            positive,
        }
    }

    fn tr(from: &str, guard: Vec<Literal>, to: &str) -> Transition {
        Transition {
            from: from.into(),
            guard,
            to: to.into(),
        }
    }

    fn state(name: &str) -> FsmState {
        FsmState {
            name: name.into(),
            moore: BTreeMap::new(),
        }
    }

    /// Two walk phases toggled by `x`; grasp is `!x`.
    fn phase_fsm() -> FsmSpec {
        let mut mealy = IndexMap::new();
        mealy.insert(
            "grasp".to_string(),
            Expr::Not(Box::new(Expr::Var("x".into()))),
        );
        FsmSpec {
            name: "gait".into(),
            inputs: vec!["x".into()],
            outputs: vec!["grasp".into()],
            states: vec![state("EVEN"), state("ODD")],
            initial: "EVEN".into(),
            transitions: vec![
                tr("EVEN", vec![lit("x", true)], "ODD"),
                tr("EVEN", vec![lit("x", false)], "EVEN"),
                tr("ODD", vec![lit("x", true)], "EVEN"),
                tr("ODD", vec![lit("x", false)], "ODD"),
            ],
            mealy,
            ..Default::default()
        }
    }

    #[test]
    fn encoding_sizes_and_initial_zero() {
        let mut spec = phase_fsm();
        assert_eq!(encode_states(&spec), StateEncoding { bits: 1, codes: vec![0, 1] });
        spec.states = (0..5).map(|i| state(&format!("S{i}"))).collect();
        spec.initial = "S2".into();
        let enc = encode_states(&spec);
        assert_eq!(enc.bits, 3);
        assert_eq!(enc.codes, vec![1, 2, 0, 3, 4]);
        spec.states.truncate(1);
        spec.initial = "S0".into();
        assert_eq!(encode_states(&spec).bits, 0);
    }

    #[test]
    fn interpreter_alternates_and_holds() {
        let spec = phase_fsm();
        spec.check().unwrap();
        let run = interpret_fsm(&spec, &[1, 1, 1, 1]);
        assert_eq!(run.bit_sequence(0), vec![true, false, true, false]);
        let run = interpret_fsm(&spec, &[0, 0]);
        assert!(run.steps.iter().all(|s| s.state == "EVEN" && s.outputs == vec![true]));
        let run = interpret_fsm(&spec, &[]);
        assert!(run.steps.is_empty());
        assert_eq!(run.initial, "EVEN");
    }

    #[test]
    fn overlap_and_gap_detection() {
        let mut spec = phase_fsm();
        spec.transitions.push(tr("EVEN", vec![lit("x", true)], "EVEN"));
        assert!(matches!(
            spec.check(),
            Err(FsmError::Nondeterministic { first: 0, second: 4, .. })
        ));
        let mut spec = phase_fsm();
        spec.transitions.remove(3);
        assert!(matches!(spec.check(), Err(FsmError::Incomplete { .. })));
        spec.implicit_self_loops = true;
        spec.check().unwrap();
        assert_eq!(spec.next_state(1, 0), 1);
    }

    #[test]
    fn mealy_can_use_state_bits_and_names() {
        let mut spec = phase_fsm();
        spec.outputs.push("odd".into());
        spec.outputs.push("q".into());
        spec.mealy.insert("odd".into(), Expr::Var("ODD".into()));
        spec.mealy.insert("q".into(), Expr::Var("Q".into()));
        spec.check().unwrap();
        let enc = spec.encoding();
        assert_eq!(spec.outputs(&enc, 1, 1), vec![false, true, true]);
        spec.mealy.insert("q".into(), Expr::Var("Q7".into()));
        assert!(matches!(spec.check(), Err(FsmError::BadMealy { .. })));
    }

    #[test]
    fn reference_trace_follows_ticks() {
        let spec = phase_fsm();
        let tr = reference_trace(&spec, &[10, 20, 30], &[(0, 1), (25, 0)], 40);
        assert_eq!(
            tr.changes("Q"),
            &[(0, LogicLevel::L0), (10, LogicLevel::L1), (20, LogicLevel::L0)]
        );
        assert_eq!(tr.changes("grasp"), &[(0, LogicLevel::L0), (25, LogicLevel::L1)]);
    }

    #[test]
    fn expr_display_parenthesizes() {
        let e = Expr::And(vec![
            Expr::Or(vec![Expr::Var("a".into()), Expr::Var("b".into())]),
            Expr::Not(Box::new(Expr::Var("c".into()))),
        ]);
        assert_eq!(e.to_string(), "(a | b) & !c");
    }
}
