// SPDX-License-Identifier: Apache-2.0

//! Minimal s-expression reader for solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    /// A symbol, numeral or keyword; `|quoted|` symbols lose their bars.
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::Str(s) => write!(f, "{s:?}"),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SexpError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for SexpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

/// Parses every top-level s-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            return Ok(out);
        }
        out.push(parse_one(text, &mut pos)?);
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b';' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => return,
        }
    }
}

fn parse_one(text: &str, pos: &mut usize) -> Result<Sexp, SexpError> {
    let bytes = text.as_bytes();
    skip_ws(bytes, pos);
    let err = |offset, message: &str| SexpError {
        offset,
        message: message.to_string(),
    };
    match bytes.get(*pos) {
        None => Err(err(*pos, "unexpected end of input")),
        Some(b'(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(bytes, pos);
                match bytes.get(*pos) {
                    None => return Err(err(*pos, "unclosed `(`")),
                    Some(b')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_one(text, pos)?),
                }
            }
        }
        Some(b')') => Err(err(*pos, "unexpected `)`")),
        Some(b'|') => {
            let start = *pos + 1;
            let end = text[start..]
                .find('|')
                .map(|k| start + k)
                .ok_or_else(|| err(*pos, "unclosed `|`"))?;
            *pos = end + 1;
            Ok(Sexp::Atom(text[start..end].to_string()))
        }
        Some(b'"') => {
            let mut s = String::new();
            let mut i = *pos + 1;
            loop {
                match bytes.get(i) {
                    None => return Err(err(*pos, "unclosed string")),
                    Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some(b'"') => break,
                    Some(_) => {
                        let ch = text[i..].chars().next().unwrap();
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            *pos = i + 1;
            Ok(Sexp::Str(s))
        }
        Some(_) => {
            let start = *pos;
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && !matches!(bytes[*pos], b'(' | b')' | b'|' | b'"' | b';')
            {
                *pos += 1;
            }
            Ok(Sexp::Atom(text[start..*pos].to_string()))
        }
    }
}

/// Whether `text` holds at least one complete s-expression with balanced
/// parentheses (strings and quoted symbols respected).
pub fn is_balanced(text: &str) -> bool {
    let mut depth = 0i64;
    let mut seen_open = false;
    let mut in_str = false;
    let mut in_bar = false;
    for c in text.chars() {
        match c {
            '"' if !in_bar => in_str = !in_str,
            '|' if !in_str => in_bar = !in_bar,
            '(' if !in_str && !in_bar => {
                depth += 1;
                seen_open = true;
            }
            ')' if !in_str && !in_bar => depth -= 1,
            _ => {}
        }
    }
    seen_open && depth <= 0 && !in_str && !in_bar
}
