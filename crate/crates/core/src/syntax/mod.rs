//! Parsers and canonical serializers for the text formats: netlists
//! (`.fnl`), state machines (`.fsm`), stimulus files (`.stim`) and
//! `key = value` parameter files.

use std::fmt;

use crate::span::SourceSpan;

pub mod fnl;
pub mod fsm;
pub mod lexer;
pub mod params;
pub mod stim;

pub use fnl::{parse_fnl, serialize_fnl};
pub use fsm::{parse_fsm, serialize_fsm};
pub use params::parse_params;
pub use stim::{parse_stim, serialize_stim};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    Semantic,
    /// Two transitions out of one state accept the same input combination.
    Nondeterministic,
    /// Some (state, input combination) has no transition.
    Incomplete,
    /// Stimulus timestamps go backwards.
    NonMonotonic,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lexical => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Semantic => "semantic error",
            ParseErrorKind::Nondeterministic => "non-deterministic transitions",
            ParseErrorKind::Incomplete => "incomplete transition function",
            ParseErrorKind::NonMonotonic => "non-monotonic timestamps",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
    /// Second location for errors involving two items (overlapping
    /// transitions).
    pub related: Option<SourceSpan>,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            kind,
            span,
            message: message.into(),
            related: None,
        }
    }

    pub fn semantic(span: &SourceSpan, message: impl Into<String>) -> Self {
        Self::new(ParseErrorKind::Semantic, span.clone(), message)
    }
}

/// Span used for whole-file errors: the last line of the input.
pub(crate) fn eof_span(text: &str, file: &str) -> SourceSpan {
    let lines = text.split('\n').count().max(1);
    SourceSpan::new(file, lines, 1, 0)
}

/// Shortest round-trip float formatting used by every serializer: plain
/// decimal or scientific, whichever is shorter (plain on ties).
pub fn fmt_num(v: f64) -> String {
    let plain = format!("{v}");
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 1.0, -80000.0, 1e9, 5e-10, 0.5, 2e7, 1e14, 0.1 + 0.2, -45000.0] {
            let s = fmt_num(v);
            let lines = lexer::tokenize(&s, "t").unwrap();
            match &lines[0].tokens[0].tok {
                lexer::Tok::Number { value, .. } => assert_eq!(*value, v, "{s}"),
                t => panic!("{t:?}"),
            }
        }
        assert_eq!(fmt_num(1e9), "1e9");
        assert_eq!(fmt_num(20.0), "20");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(-80000.0), "-8e4");
    }
}
