// SPDX-License-Identifier: Apache-2.0

use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Magnitude only; the parser folds a leading minus.
    Int(u64),
    Keyword(Kw),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Routine,
    Require,
    Local,
    Do,
    Ensure,
    End,
    If,
    Then,
    Elseif,
    Else,
    While,
    Invariant,
    Variant,
    Check,
    And,
    Or,
    Not,
    Implies,
    Old,
    Len,
    True,
    False,
    Integer,
    Boolean,
    Array,
}

impl Kw {
    fn from_word(w: &str) -> Option<Kw> {
        Some(match w {
            "routine" => Kw::Routine,
            "require" => Kw::Require,
            "local" => Kw::Local,
            "do" => Kw::Do,
            "ensure" => Kw::Ensure,
            "end" => Kw::End,
            "if" => Kw::If,
            "then" => Kw::Then,
            "elseif" => Kw::Elseif,
            "else" => Kw::Else,
            "while" => Kw::While,
            "invariant" => Kw::Invariant,
            "variant" => Kw::Variant,
            "check" => Kw::Check,
            "and" => Kw::And,
            "or" => Kw::Or,
            "not" => Kw::Not,
            "implies" => Kw::Implies,
            "old" => Kw::Old,
            "len" => Kw::Len,
            "True" | "true" => Kw::True,
            "False" | "false" => Kw::False,
            "INTEGER" => Kw::Integer,
            "BOOLEAN" => Kw::Boolean,
            "ARRAY" => Kw::Array,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let tok = match Kw::from_word(&word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let value = digits.parse::<u64>().map_err(|_| ParseError::Syntax {
                span,
                message: format!("integer literal `{digits}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                span,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            ('/', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            _ => {
                return Err(ParseError::Syntax {
                    span,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, span });
        i += width;
        col += width as u32;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}
