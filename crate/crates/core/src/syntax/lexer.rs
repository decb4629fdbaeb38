//! Line-oriented tokenizer shared by every text format.

use super::{ParseError, ParseErrorKind};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Identifier, possibly hierarchical (`a.b.c`).
    Ident(String),
    /// Numeric literal with its SI suffix already applied.
    Number { value: f64, suffix: Option<String> },
    Eq,
    LParen,
    RParen,
    Comma,
    At,
    Bang,
    Amp,
    Pipe,
    Arrow,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number { .. } => "number".into(),
            Tok::Eq => "`=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::At => "`@`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// One non-empty source line.
#[derive(Debug, Clone)]
pub struct Line {
    pub tokens: Vec<Token>,
    pub span: SourceSpan,
}

/// Multiplier for a unit suffix. Time and pressure units share the table;
/// callers that care about the dimension inspect the suffix.
pub fn suffix_scale(suffix: &str) -> Option<f64> {
    Some(match suffix {
        "s" | "Pa" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "kPa" => 1e3,
        "MPa" => 1e6,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" => 1e-6,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        _ => return None,
    })
}

pub fn is_time_suffix(suffix: &str) -> bool {
    matches!(suffix, "s" | "ms" | "us" | "ns")
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into lines of tokens. Comments (`#` to end of line) and
/// blank lines are dropped. CRLF is accepted.
pub fn tokenize(text: &str, file: &str) -> Result<Vec<Line>, ParseError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<(usize, char)> = raw.char_indices().collect();
        let mut tokens = Vec::new();
        let mut i = 0;
        let span_at = |ci: usize, len: usize| SourceSpan::new(file, line_no, ci + 1, len);
        while i < chars.len() {
            let (byte, c) = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let single = |t: Tok| Token {
                tok: t,
                span: span_at(start, c.len_utf8()),
            };
            match c {
                '=' => tokens.push(single(Tok::Eq)),
                '(' => tokens.push(single(Tok::LParen)),
                ')' => tokens.push(single(Tok::RParen)),
                ',' => tokens.push(single(Tok::Comma)),
                '@' => tokens.push(single(Tok::At)),
                '!' => tokens.push(single(Tok::Bang)),
                '&' => tokens.push(single(Tok::Amp)),
                '|' => tokens.push(single(Tok::Pipe)),
                '-' if chars.get(i + 1).map(|p| p.1) == Some('>') => {
                    tokens.push(Token {
                        tok: Tok::Arrow,
                        span: span_at(start, 2),
                    });
                    i += 2;
                    continue;
                }
                _ if is_ident_start(c) => {
                    let mut j = i;
                    loop {
                        while j < chars.len() && is_ident_continue(chars[j].1) {
                            j += 1;
                        }
                        if j + 1 < chars.len() && chars[j].1 == '.' && is_ident_start(chars[j + 1].1)
                        {
                            j += 1;
                            continue;
                        }
                        break;
                    }
                    let end_byte = chars.get(j).map(|p| p.0).unwrap_or(raw.len());
                    tokens.push(Token {
                        tok: Tok::Ident(raw[byte..end_byte].to_string()),
                        span: span_at(start, end_byte - byte),
                    });
                    i = j;
                    continue;
                }
                _ if c.is_ascii_digit()
                    || c == '.'
                    || ((c == '-' || c == '+')
                        && chars
                            .get(i + 1)
                            .is_some_and(|p| p.1.is_ascii_digit() || p.1 == '.')) =>
                {
                    let (tok, next) = lex_number(raw, &chars, i).map_err(|msg| {
                        ParseError::new(ParseErrorKind::Lexical, span_at(start, 1), msg)
                    })?;
                    let end_byte = chars.get(next).map(|p| p.0).unwrap_or(raw.len());
                    tokens.push(Token {
                        tok,
                        span: span_at(start, end_byte - byte),
                    });
                    i = next;
                    continue;
                }
                _ => {
                    return Err(ParseError::new(
                        ParseErrorKind::Lexical,
                        span_at(start, c.len_utf8()),
                        format!("unexpected character `{c}`"),
                    ))
                }
            }
            i += 1;
        }
        if !tokens.is_empty() {
            lines.push(Line {
                tokens,
                span: SourceSpan::new(file, line_no, 1, raw.len()),
            });
        }
    }
    Ok(lines)
}

fn lex_number(raw: &str, chars: &[(usize, char)], start: usize) -> Result<(Tok, usize), String> {
    let mut j = start;
    if matches!(chars[j].1, '-' | '+') {
        j += 1;
    }
    let mut digits = 0;
    while j < chars.len() && chars[j].1.is_ascii_digit() {
        j += 1;
        digits += 1;
    }
    if j < chars.len() && chars[j].1 == '.' {
        j += 1;
        while j < chars.len() && chars[j].1.is_ascii_digit() {
            j += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return Err("malformed number".into());
    }
    // Exponent only if followed by digits, so `2e` can't swallow a suffix.
    if j < chars.len() && matches!(chars[j].1, 'e' | 'E') {
        let mut k = j + 1;
        if k < chars.len() && matches!(chars[k].1, '-' | '+') {
            k += 1;
        }
        if k < chars.len() && chars[k].1.is_ascii_digit() {
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            j = k;
        }
    }
    let num_end = chars.get(j).map(|p| p.0).unwrap_or(raw.len());
    let num_text = &raw[chars[start].0..num_end];
    let mut value: f64 = num_text
        .parse()
        .map_err(|_| format!("malformed number `{num_text}`"))?;
    let mut s = j;
    while s < chars.len() && chars[s].1.is_ascii_alphabetic() {
        s += 1;
    }
    let suffix = if s > j {
        let suf_end = chars.get(s).map(|p| p.0).unwrap_or(raw.len());
        let suf = &raw[num_end..suf_end];
        let scale = suffix_scale(suf).ok_or_else(|| format!("unknown unit suffix `{suf}`"))?;
        value *= scale;
        Some(suf.to_string())
    } else {
        None
    };
    if s < chars.len() && (is_ident_continue(chars[s].1) || chars[s].1 == '.') {
        return Err(format!("malformed number near `{}`", chars[s].1));
    }
    if !value.is_finite() {
        return Err(format!("number `{num_text}` is out of range"));
    }
    Ok((Tok::Number { value, suffix }, s))
}

/// Cursor over the tokens of one line.
pub struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(line: &'a Line) -> Self {
        Self { line, pos: 0 }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.line.tokens.get(self.pos)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&'a Token> {
        self.line.tokens.get(self.pos + offset)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.line.tokens.len()
    }

    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.line.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Span of the next token, or the end of the line.
    pub fn here(&self) -> SourceSpan {
        match self.peek() {
            Some(t) => t.span.clone(),
            None => {
                let last = self.line.tokens.last().map(|t| &t.span).unwrap_or(&self.line.span);
                SourceSpan::new(&last.file, last.line, last.column + last.len.max(1), 0)
            }
        }
    }

    pub fn error(&self, expected: &str) -> ParseError {
        let found = self
            .peek()
            .map(|t| t.tok.describe())
            .unwrap_or_else(|| "end of line".into());
        ParseError::new(
            ParseErrorKind::Syntax,
            self.here(),
            format!("expected {expected}, found {found}"),
        )
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<&'a Token, ParseError> {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            Ok(self.next().unwrap())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(&'a str, &'a SourceSpan), ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                span,
            }) => {
                self.pos += 1;
                Ok((s.as_str(), span))
            }
            _ => Err(self.error(what)),
        }
    }

    /// A plain (non-hierarchical) identifier.
    pub fn simple_ident(&mut self, what: &str) -> Result<(&'a str, &'a SourceSpan), ParseError> {
        let save = self.pos;
        let (s, span) = self.ident(what)?;
        if s.contains('.') {
            self.pos = save;
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                span.clone(),
                format!("expected {what}, found hierarchical name `{s}`"),
            ));
        }
        Ok((s, span))
    }

    pub fn number(
        &mut self,
        what: &str,
    ) -> Result<(f64, Option<&'a str>, &'a SourceSpan), ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Number { value, suffix },
                span,
            }) => {
                self.pos += 1;
                Ok((*value, suffix.as_deref(), span))
            }
            _ => Err(self.error(what)),
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of line"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, "t")
            .unwrap()
            .into_iter()
            .flat_map(|l| l.tokens.into_iter().map(|t| t.tok))
            .collect()
    }

    #[test]
    fn numbers_with_suffixes() {
        assert_eq!(
            toks("1e9 50ms -2kPa 0.5 5e-10"),
            vec![
                Tok::Number { value: 1e9, suffix: None },
                Tok::Number { value: 50.0 * 1e-3, suffix: Some("ms".into()) },
                Tok::Number { value: -2000.0, suffix: Some("kPa".into()) },
                Tok::Number { value: 0.5, suffix: None },
                Tok::Number { value: 5e-10, suffix: None },
            ]
        );
    }

    #[test]
    fn arrows_and_hierarchical_idents() {
        assert_eq!(
            toks("a.b -> c # trailing"),
            vec![Tok::Ident("a.b".into()), Tok::Arrow, Tok::Ident("c".into())]
        );
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let lines = tokenize("# only comment\r\n\r\nx = 1\r\n", "t").unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].span.line, 3);
    }

    #[test]
    fn lexical_errors_have_spans() {
        let e = tokenize("ok\n  $bad", "f").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
        assert_eq!((e.span.line, e.span.column), (2, 3));
        let e = tokenize("r=5furlongs", "f").unwrap_err();
        assert!(e.message.contains("suffix"), "{}", e.message);
    }
}
