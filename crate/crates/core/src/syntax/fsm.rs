//! State-machine language.
//!
//! ```text
//! fsm gait
//! input x
//! output grasp
//! state GRASP grasp=1
//! state WALK
//! initial GRASP
//! GRASP -> WALK when x
//! GRASP -> GRASP when !x
//! WALK -> WALK when x
//! WALK -> GRASP when !x
//! mealy grasp = !x
//! ```
//!
//! Guards are conjunctions of input literals joined by `&`. Mealy
//! expressions use `|`, `&`, `!`, parentheses, `0`, `1`, input names,
//! state names and state-bit names.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::lexer::{tokenize, Cursor, Tok};
use super::{eof_span, ParseError, ParseErrorKind};
use crate::fsm::{Expr, FsmError, FsmSpec, FsmState, Literal, Transition};
use crate::span::SourceSpan;

pub fn parse_fsm(text: &str) -> Result<FsmSpec, ParseError> {
    parse_fsm_named(text, "<input>")
}

pub fn parse_fsm_named(text: &str, file: &str) -> Result<FsmSpec, ParseError> {
    let lines = tokenize(text, file)?;
    let mut spec = FsmSpec::default();
    let mut declared: BTreeMap<String, SourceSpan> = BTreeMap::new();
    let mut seen_header = false;

    for line in &lines {
        let mut c = Cursor::new(line);
        let (kw, kw_span) = c.simple_ident("statement")?;
        let is_transition = matches!(c.peek().map(|t| &t.tok), Some(Tok::Arrow));
        if !seen_header && kw != "fsm" {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                kw_span.clone(),
                format!("expected `fsm NAME` header, found identifier `{kw}`"),
            ));
        }
        if is_transition {
            c.expect(&Tok::Arrow)?;
            let (to, _) = c.simple_ident("target state")?;
            let mut guard = Vec::new();
            if !c.at_end() {
                let (w, _) = c.simple_ident("`when`")?;
                if w != "when" {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        line.tokens[3].span.clone(),
                        format!("expected `when`, found identifier `{w}`"),
                    ));
                }
                loop {
                    let positive = !c.eat(&Tok::Bang);
                    let (var, _) = c.simple_ident("input name")?;
                    guard.push(Literal {
                        var: var.into(),
                        positive,
                    });
                    if !c.eat(&Tok::Amp) {
                        break;
                    }
                }
            }
            c.expect_end()?;
            spec.transitions.push(Transition {
                from: kw.into(),
                guard,
                to: to.into(),
            });
            spec.spans.transitions.push(line.span.clone());
            continue;
        }
        match kw {
            "fsm" => {
                if seen_header {
                    return Err(ParseError::semantic(kw_span, "second `fsm` header"));
                }
                let (name, _) = c.simple_ident("machine name")?;
                c.expect_end()?;
                spec.name = name.into();
                spec.spans.header = Some(line.span.clone());
                seen_header = true;
            }
            "input" | "output" => {
                while !c.at_end() {
                    let (name, span) = c.simple_ident("signal name")?;
                    declare(&mut declared, name, span)?;
                    if kw == "input" {
                        spec.inputs.push(name.into());
                    } else {
                        spec.outputs.push(name.into());
                    }
                }
            }
            "state" => {
                let (name, span) = c.simple_ident("state name")?;
                declare(&mut declared, name, span)?;
                let mut moore = BTreeMap::new();
                while !c.at_end() {
                    let (out, ospan) = c.simple_ident("output assignment")?;
                    c.expect(&Tok::Eq)?;
                    let value = bit(&mut c)?;
                    if moore.insert(out.to_string(), value).is_some() {
                        return Err(ParseError::semantic(
                            ospan,
                            format!("output `{out}` assigned twice"),
                        ));
                    }
                }
                spec.states.push(FsmState {
                    name: name.into(),
                    moore,
                });
                spec.spans.states.push(line.span.clone());
            }
            "initial" => {
                let (name, _) = c.simple_ident("state name")?;
                c.expect_end()?;
                if spec.spans.initial.is_some() {
                    return Err(ParseError::semantic(kw_span, "initial state given twice"));
                }
                spec.initial = name.into();
                spec.spans.initial = Some(line.span.clone());
            }
            "option" => {
                let (opt, span) = c.simple_ident("option name")?;
                c.expect_end()?;
                match opt {
                    "implicit_self_loops" => spec.implicit_self_loops = true,
                    _ => {
                        return Err(ParseError::semantic(span, format!("unknown option `{opt}`")))
                    }
                }
            }
            "mealy" => {
                let (out, span) = c.simple_ident("output name")?;
                c.expect(&Tok::Eq)?;
                let e = expr(&mut c)?;
                c.expect_end()?;
                if spec.mealy.insert(out.into(), e).is_some() {
                    return Err(ParseError::semantic(
                        span,
                        format!("Mealy output `{out}` defined twice"),
                    ));
                }
                spec.spans.mealy.push(line.span.clone());
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    kw_span.clone(),
                    format!(
                        "expected statement keyword or `STATE -> STATE`, found identifier `{other}`"
                    ),
                ))
            }
        }
    }

    if !seen_header {
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            eof_span(text, file),
            "expected `fsm NAME` header, found end of file",
        ));
    }
    if spec.spans.initial.is_none() {
        return Err(ParseError::semantic(
            &eof_span(text, file),
            "no `initial` state declared",
        ));
    }
    spec.check().map_err(|e| locate(&spec, e, text, file))?;
    Ok(spec)
}

fn declare(
    declared: &mut BTreeMap<String, SourceSpan>,
    name: &str,
    span: &SourceSpan,
) -> Result<(), ParseError> {
    if let Some(prev) = declared.get(name) {
        let mut e = ParseError::semantic(span, format!("name `{name}` declared twice"));
        e.related = Some(prev.clone());
        return Err(e);
    }
    declared.insert(name.into(), span.clone());
    Ok(())
}

fn bit(c: &mut Cursor<'_>) -> Result<bool, ParseError> {
    let span = c.here();
    let (v, suffix, _) = c.number("0 or 1")?;
    match (v, suffix) {
        (v, None) if v == 0.0 => Ok(false),
        (v, None) if v == 1.0 => Ok(true),
        _ => Err(ParseError::new(
            ParseErrorKind::Syntax,
            span,
            "expected 0 or 1, found number",
        )),
    }
}

fn expr(c: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    let mut terms = vec![and_expr(c)?];
    while c.eat(&Tok::Pipe) {
        terms.push(and_expr(c)?);
    }
    Ok(if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Or(terms)
    })
}

fn and_expr(c: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    let mut factors = vec![unary(c)?];
    while c.eat(&Tok::Amp) {
        factors.push(unary(c)?);
    }
    Ok(if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::And(factors)
    })
}

fn unary(c: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    if c.eat(&Tok::Bang) {
        return Ok(Expr::Not(Box::new(unary(c)?)));
    }
    if c.eat(&Tok::LParen) {
        let e = expr(c)?;
        c.expect(&Tok::RParen)?;
        return Ok(e);
    }
    match c.peek().map(|t| &t.tok) {
        Some(Tok::Number { .. }) => Ok(Expr::Const(bit(c)?)),
        Some(Tok::Ident(_)) => Ok(Expr::Var(c.simple_ident("identifier")?.0.into())),
        _ => Err(c.error("expression")),
    }
}

/// Attaches the most specific span available to a model-level error.
fn locate(spec: &FsmSpec, e: FsmError, text: &str, file: &str) -> ParseError {
    let fallback = || spec.spans.header.clone().unwrap_or_else(|| eof_span(text, file));
    let tr = |i: usize| spec.spans.transitions.get(i).cloned().unwrap_or_else(fallback);
    let message = e.to_string();
    match e {
        FsmError::Nondeterministic { first, second, .. } => ParseError {
            kind: ParseErrorKind::Nondeterministic,
            span: tr(second),
            message,
            related: Some(tr(first)),
        },
        FsmError::Incomplete { ref state, .. } => {
            let span = spec
                .state_index(state)
                .and_then(|i| spec.spans.states.get(i).cloned())
                .unwrap_or_else(fallback);
            ParseError::new(ParseErrorKind::Incomplete, span, message)
        }
        FsmError::UnknownState { transition, .. }
        | FsmError::UnknownInput { transition, .. }
        | FsmError::ContradictoryGuard(transition) => {
            ParseError::semantic(&tr(transition), message)
        }
        FsmError::UnknownInitial(_) => ParseError::semantic(
            &spec.spans.initial.clone().unwrap_or_else(fallback),
            message,
        ),
        FsmError::BadMooreOutput { state, .. } => ParseError::semantic(
            &spec.spans.states.get(state).cloned().unwrap_or_else(fallback),
            message,
        ),
        FsmError::BadMealy { index, .. } => ParseError::semantic(
            &spec.spans.mealy.get(index).cloned().unwrap_or_else(fallback),
            message,
        ),
        FsmError::Declaration(_) => ParseError::semantic(&fallback(), message),
    }
}

/// Canonical text: declarations first, then transitions and Mealy
/// definitions in their stored order.
pub fn serialize_fsm(spec: &FsmSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fsm {}", spec.name);
    if !spec.inputs.is_empty() {
        let _ = writeln!(out, "input {}", spec.inputs.join(" "));
    }
    if !spec.outputs.is_empty() {
        let _ = writeln!(out, "output {}", spec.outputs.join(" "));
    }
    for s in &spec.states {
        out.push_str("state ");
        out.push_str(&s.name);
        for (o, v) in &s.moore {
            let _ = write!(out, " {o}={}", u8::from(*v));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "initial {}", spec.initial);
    if spec.implicit_self_loops {
        out.push_str("option implicit_self_loops\n");
    }
    for t in &spec.transitions {
        let _ = write!(out, "{} -> {}", t.from, t.to);
        if !t.guard.is_empty() {
            let g: Vec<String> = t.guard.iter().map(|l| l.to_string()).collect();
            let _ = write!(out, " when {}", g.join(" & "));
        }
        out.push('\n');
    }
    for (o, e) in &spec.mealy {
        let _ = writeln!(out, "mealy {o} = {e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRASP_WALK: &str = "\
fsm gait
input x
output grasp
state GRASP grasp=1
state WALK
initial GRASP
GRASP -> WALK when x
GRASP -> GRASP when !x
WALK -> WALK when x
WALK -> GRASP when !x
";

    #[test]
    fn two_state_machine_parses() {
        let spec = parse_fsm(GRASP_WALK).unwrap();
        assert_eq!(spec.states.len(), 2);
        assert_eq!(spec.initial, "GRASP");
        assert_eq!(spec.transitions.len(), 4);
        assert!(spec.states[0].moore["grasp"]);
    }

    #[test]
    fn degenerate_single_state() {
        let spec = parse_fsm("fsm one\nstate S\ninitial S\nS -> S\n").unwrap();
        assert!(spec.inputs.is_empty());
        assert_eq!(spec.encoding().bits, 0);
    }

    #[test]
    fn overlap_reports_both_transitions() {
        let text = GRASP_WALK.replace("GRASP -> GRASP when !x", "GRASP -> GRASP when x");
        let e = parse_fsm(&text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Nondeterministic);
        assert_eq!(e.span.line, 8);
        assert_eq!(e.related.unwrap().line, 7);
    }

    #[test]
    fn missing_transition_is_incomplete() {
        let text = GRASP_WALK.replace("WALK -> GRASP when !x\n", "");
        let e = parse_fsm(&text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Incomplete);
        assert_eq!(e.span.line, 5);
        let with_flag = text.replace("initial GRASP", "initial GRASP\noption implicit_self_loops");
        assert!(parse_fsm(&with_flag).is_ok());
    }

    #[test]
    fn syntax_errors_point_inside_input() {
        for bad in [
            "",
            "state S",
            "fsm a\nstate S\ninitial S\nS -> S when",
            "fsm a\nstate S\ninitial S\nS -> S if x",
            "fsm a\nstate S x=2\ninitial S",
            "fsm a\ninput x\nstate S\ninitial S\nS -> S\nmealy y = (x",
        ] {
            let e = parse_fsm(bad).unwrap_err();
            assert!(e.span.line >= 1 && e.span.line <= bad.lines().count().max(1), "{bad}: {e}");
        }
    }

    #[test]
    fn mealy_round_trip() {
        let text = "fsm m\ninput x y\noutput o\nstate A\nstate B\ninitial A\noption implicit_self_loops\nA -> B when x & !y\nmealy o = (Q | !x) & y | 0\n";
        let spec = parse_fsm(text).unwrap();
        let again = parse_fsm(&serialize_fsm(&spec)).unwrap();
        assert_eq!(spec, again);
        assert_eq!(serialize_fsm(&again), serialize_fsm(&spec));
    }
}
