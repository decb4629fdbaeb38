//! `key = value` parameter files for the analog simulator. Values accept
//! unit suffixes (`-80kPa`, `0.5ms`); unlisted keys keep their defaults.

use super::lexer::{tokenize, Cursor, Tok};
use super::{eof_span, ParseError};
use crate::analog::AnalogParams;

pub fn parse_params(text: &str) -> Result<AnalogParams, ParseError> {
    parse_params_named(text, "<input>")
}

pub fn parse_params_named(text: &str, file: &str) -> Result<AnalogParams, ParseError> {
    let mut params = AnalogParams::default();
    for line in &tokenize(text, file)? {
        let mut c = Cursor::new(line);
        let (key, key_span) = c.simple_ident("parameter name")?;
        c.expect(&Tok::Eq)?;
        let value_span = c.here();
        let (value, _, _) = c.number("number")?;
        c.expect_end()?;
        if params.get(key).is_none() {
            return Err(ParseError::semantic(key_span, format!("unknown parameter `{key}`")));
        }
        params
            .set(key, value)
            .map_err(|m| ParseError::semantic(&value_span, m))?;
    }
    params
        .validate()
        .map_err(|m| ParseError::semantic(&eof_span(text, file), m))?;
    Ok(params)
}

/// Every parameter, one per line, in a form [`parse_params`] accepts.
pub fn serialize_params(params: &AnalogParams) -> String {
    crate::analog::PARAM_KEYS
        .iter()
        .map(|k| format!("{k} = {}\n", super::fmt_num(params.get(k).unwrap())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_and_defaults() {
        let p = parse_params("# comment\np_vac = -70kPa\nh = 0.25ms\n").unwrap();
        assert_eq!(p.p_vac, -70_000.0);
        assert_eq!(p.h, 2.5e-4);
        assert_eq!(p.r_pull, AnalogParams::default().r_pull);
    }

    #[test]
    fn errors() {
        assert!(parse_params("nope = 1").is_err());
        assert!(parse_params("p_open = -10000").is_err());
        assert!(parse_params("stride = 1.5").is_err());
        assert!(parse_params("h 1").is_err());
    }

    #[test]
    fn round_trip() {
        let mut p = AnalogParams::default();
        p.c_gate = 3.3e-10;
        p.stride = 4;
        assert_eq!(parse_params(&serialize_params(&p)).unwrap(), p);
    }
}
