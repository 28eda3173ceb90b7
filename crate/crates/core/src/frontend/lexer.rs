//! Tokenizer for `.proc` sources.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Identifier with optional `'N` stamp suffix.
    Ident(String, u32),
    Num(u64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s, 0) => write!(f, "`{s}`"),
            Tok::Ident(s, n) => write!(f, "`{s}'{n}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const PUNCT: &[&str] = &["(+)", ".", ",", "(", ")", "{", "}", "<", ">", "!", "?", ":", ";", "=", "|", "*"];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    fn advance(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize, n: usize) {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&chars, &mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&chars, &mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if ident_start(c) {
            let mut j = i;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            let mut name: String = chars[i..j].iter().collect();
            let mut stamp = 0u32;
            while j < chars.len() && chars[j] == '\'' {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if k > j + 1 {
                    let digits: String = chars[j + 1..k].iter().collect();
                    stamp = digits.parse().map_err(|_| ParseError { line, col, msg: "stamp out of range".into() })?;
                    j = k;
                    break;
                }
                name.push('\'');
                j += 1;
            }
            out.push(Spanned { tok: Tok::Ident(name, stamp), line: l0, col: c0 });
            let n = j - i;
            advance(&chars, &mut i, &mut line, &mut col, n);
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let n = digits.parse().map_err(|_| ParseError { line, col, msg: "number out of range".into() })?;
            out.push(Spanned { tok: Tok::Num(n), line: l0, col: c0 });
            let n = j - i;
            advance(&chars, &mut i, &mut line, &mut col, n);
            continue;
        }
        let mut matched = false;
        for p in PUNCT {
            let pc: Vec<char> = p.chars().collect();
            if chars[i..].starts_with(&pc) {
                out.push(Spanned { tok: Tok::Punct(p), line: l0, col: c0 });
                advance(&chars, &mut i, &mut line, &mut col, pc.len());
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(ParseError { line, col, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}
