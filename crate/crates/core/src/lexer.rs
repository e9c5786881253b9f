//! Tokenizer shared by the constraint and formula grammars.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Raw rational literal, e.g. `-3` or `7/2`.
    Number(String),
    CoopOpen,
    CoopClose,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    LParen,
    RParen,
    Comma,
    Amp,
    Pipe,
    Bang,
    Plus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::CoopOpen => f.write_str("`<<`"),
            Tok::CoopClose => f.write_str("`>>`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// A token with the byte offset where it starts.
#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

/// Syntax error in constraint or formula text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {pos}: expected {expected}, found {found}")]
pub struct ParseError {
    pub pos: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(cur: &Cursor, expected: impl Into<String>) -> Self {
        ParseError { pos: cur.pos(), expected: expected.into(), found: cur.peek().to_string() }
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError { pos: e.pos, expected: "a token".into(), found: format!("`{}`", e.found) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub pos: usize,
    pub found: char,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let next = bytes.get(i + 1).copied();
        let tok = match c {
            b'<' if next == Some(b'<') => {
                i += 2;
                Tok::CoopOpen
            }
            b'>' if next == Some(b'>') => {
                i += 2;
                Tok::CoopClose
            }
            b'<' if next == Some(b'=') => {
                i += 2;
                Tok::Le
            }
            b'>' if next == Some(b'=') => {
                i += 2;
                Tok::Ge
            }
            b'<' => {
                i += 1;
                Tok::Lt
            }
            b'>' => {
                i += 1;
                Tok::Gt
            }
            b'=' => {
                i += 1;
                Tok::Eq
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'|' => {
                i += 1;
                Tok::Pipe
            }
            b'!' => {
                i += 1;
                Tok::Bang
            }
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'-' if next.is_some_and(|n| n.is_ascii_digit()) => {
                i += 1;
                i = scan_number(bytes, i);
                Tok::Number(text[start..i].to_string())
            }
            b'0'..=b'9' => {
                i = scan_number(bytes, i);
                Tok::Number(text[start..i].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => {
                let found = text[start..].chars().next().unwrap_or('?');
                return Err(LexError { pos: start, found });
            }
        };
        out.push(Spanned { tok, pos: start });
    }
    out.push(Spanned { tok: Tok::Eof, pos: text.len() });
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    i
}

/// Cursor over a token stream with one token of lookahead.
pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    at: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Spanned>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn pos(&self) -> usize {
        self.toks[self.at].pos
    }

    pub fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }
}
