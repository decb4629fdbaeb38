//! Stimulus language.
//!
//! ```text
//! timescale 1ms
//! init Q=0
//! clock CLK period=1000 duty=0.5 phase=500 start=0
//! @0 x=0
//! @250 x=1
//! end 5000
//! ```
//!
//! Times are integer units of the timescale (milliseconds unless changed).
//! A time written with a unit suffix is converted to units.

use std::fmt::Write;

use super::lexer::{is_time_suffix, tokenize, Cursor, Tok};
use super::{fmt_num, ParseError, ParseErrorKind};
use crate::span::SourceSpan;
use crate::stimulus::{ClockDef, StimEvent, Stimulus};

pub fn parse_stim(text: &str) -> Result<Stimulus, ParseError> {
    parse_stim_named(text, "<input>")
}

pub fn parse_stim_named(text: &str, file: &str) -> Result<Stimulus, ParseError> {
    let lines = tokenize(text, file)?;
    let mut stim = Stimulus::default();
    let mut last_time: Option<(u64, SourceSpan)> = None;
    let mut seen_timed = false;

    for line in &lines {
        let mut c = Cursor::new(line);
        if c.eat(&Tok::At) {
            let span = c.here();
            let t = time(&mut c, stim.timescale)?;
            if let Some((prev, prev_span)) = &last_time {
                if t < *prev {
                    return Err(ParseError {
                        kind: ParseErrorKind::NonMonotonic,
                        span,
                        message: format!("time {t} precedes earlier time {prev}"),
                        related: Some(prev_span.clone()),
                    });
                }
            }
            last_time = Some((t, span));
            seen_timed = true;
            if c.at_end() {
                return Err(c.error("assignment `net=0|1`"));
            }
            while !c.at_end() {
                let (net, level) = assignment(&mut c)?;
                stim.events.push(StimEvent {
                    time: t,
                    net: net.into(),
                    level,
                });
            }
            continue;
        }
        let (kw, kw_span) = c.simple_ident("directive")?;
        match kw {
            "timescale" => {
                let span = c.here();
                let (v, suffix, _) = c.number("time unit")?;
                c.expect_end()?;
                if suffix.is_none_or(|s| !is_time_suffix(s)) || v <= 0.0 {
                    return Err(ParseError::semantic(
                        &span,
                        "timescale needs a positive time such as `1ms`",
                    ));
                }
                if seen_timed || !stim.clocks.is_empty() {
                    return Err(ParseError::semantic(
                        kw_span,
                        "timescale must precede every timed directive",
                    ));
                }
                stim.timescale = v;
            }
            "init" => {
                while !c.at_end() {
                    let (net, level) = assignment(&mut c)?;
                    stim.inits.push((net.into(), level));
                }
            }
            "clock" => {
                let (net, _) = c.ident("clock net")?;
                let mut period = None;
                let mut duty = 0.5;
                let mut phase = 0;
                let mut start = false;
                while !c.at_end() {
                    let (key, key_span) = c.simple_ident("clock parameter")?;
                    c.expect(&Tok::Eq)?;
                    let span = c.here();
                    match key {
                        "period" => {
                            let p = time(&mut c, stim.timescale)?;
                            if p < 2 {
                                return Err(ParseError::semantic(
                                    &span,
                                    "period must be at least 2 time units",
                                ));
                            }
                            period = Some(p);
                        }
                        "duty" => {
                            let (d, _, _) = c.number("duty fraction")?;
                            if !(d > 0.0 && d < 1.0) {
                                return Err(ParseError::semantic(
                                    &span,
                                    format!("duty {} outside (0, 1)", fmt_num(d)),
                                ));
                            }
                            duty = d;
                        }
                        "phase" => phase = time(&mut c, stim.timescale)?,
                        "start" => start = level(&mut c)?,
                        _ => {
                            return Err(ParseError::semantic(
                                key_span,
                                format!("unknown clock parameter `{key}`"),
                            ))
                        }
                    }
                }
                let period = period.ok_or_else(|| {
                    ParseError::semantic(kw_span, "clock needs `period=`")
                })?;
                stim.clocks.push(ClockDef {
                    net: net.into(),
                    period,
                    duty,
                    phase,
                    start,
                });
            }
            "end" => {
                let t = time(&mut c, stim.timescale)?;
                c.expect_end()?;
                stim.end_time = Some(t);
            }
            other => {
                return Err(ParseError::semantic(
                    kw_span,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    Ok(stim)
}

fn time(c: &mut Cursor<'_>, timescale: f64) -> Result<u64, ParseError> {
    let span = c.here();
    let (v, suffix, _) = c.number("time")?;
    let units = match suffix {
        Some(s) if is_time_suffix(s) => v / timescale,
        None => v,
        Some(s) => {
            return Err(ParseError::semantic(
                &span,
                format!("`{s}` is not a time unit"),
            ))
        }
    };
    let rounded = units.round();
    if units < 0.0 || (units - rounded).abs() > 1e-6 * rounded.abs().max(1.0) || rounded > 1e15 {
        return Err(ParseError::semantic(
            &span,
            "time must be a non-negative whole number of units",
        ));
    }
    Ok(rounded as u64)
}

fn level(c: &mut Cursor<'_>) -> Result<bool, ParseError> {
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

fn assignment<'a>(c: &mut Cursor<'a>) -> Result<(&'a str, bool), ParseError> {
    let (net, _) = c.ident("net name")?;
    c.expect(&Tok::Eq)?;
    Ok((net, level(c)?))
}

/// Canonical text. Events sharing a time are written on one line.
pub fn serialize_stim(stim: &Stimulus) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "timescale {}s", fmt_num(stim.timescale));
    if !stim.inits.is_empty() {
        out.push_str("init");
        for (n, l) in &stim.inits {
            let _ = write!(out, " {n}={}", u8::from(*l));
        }
        out.push('\n');
    }
    for c in &stim.clocks {
        let _ = writeln!(
            out,
            "clock {} period={} duty={} phase={} start={}",
            c.net,
            c.period,
            fmt_num(c.duty),
            c.phase,
            u8::from(c.start)
        );
    }
    let mut i = 0;
    while i < stim.events.len() {
        let t = stim.events[i].time;
        let _ = write!(out, "@{t}");
        while i < stim.events.len() && stim.events[i].time == t {
            let e = &stim.events[i];
            let _ = write!(out, " {}={}", e.net, u8::from(e.level));
            i += 1;
        }
        out.push('\n');
    }
    if let Some(end) = stim.end_time {
        let _ = writeln!(out, "end {end}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_and_clock() {
        let s = parse_stim("@0 x=0\nclock clk period=6 duty=0.5\n@10 x=1\n").unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.clocks.len(), 1);
        assert_eq!(s.clocks[0].period, 6);
        assert!(!s.clocks[0].start);
    }

    #[test]
    fn duty_and_period_bounds() {
        for bad in ["clock c period=6 duty=1.0", "clock c period=0", "clock c duty=0.5"] {
            let e = parse_stim(bad).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::Semantic, "{bad}");
        }
    }

    #[test]
    fn non_monotonic_times() {
        let e = parse_stim("@5 x=1\n@3 x=0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonMonotonic);
        assert_eq!(e.span.line, 2);
    }

    #[test]
    fn unknown_directive() {
        let e = parse_stim("wiggle x\n").unwrap_err();
        assert!(e.message.contains("unknown directive"));
    }

    #[test]
    fn suffixed_times_follow_timescale() {
        let s = parse_stim("timescale 10ms\n@1s x=1\nend 2s\n").unwrap();
        assert_eq!(s.events[0].time, 100);
        assert_eq!(s.end_time, Some(200));
        assert!(parse_stim("@1.5 x=1").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "timescale 1e-3s\ninit Q=0 Qbar=1\nclock CLK period=1000 duty=0.25 phase=500 start=0\n@0 x=0 y=1\n@250 x=1\nend 5000\n";
        let s = parse_stim(text).unwrap();
        assert_eq!(serialize_stim(&s), text);
        assert_eq!(parse_stim(&serialize_stim(&s)).unwrap(), s);
    }
}
