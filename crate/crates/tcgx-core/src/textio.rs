//! Shared helpers for the line-oriented text formats.
//!
//! Every persistent format in this crate (drawing files, catalog bundles,
//! table documents, prototypes) is UTF-8 text built from whitespace-separated
//! tokens with double-quoted strings. Writers always emit the canonical form
//! produced by the helpers here, which is what makes save→load→save
//! byte-identical.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TokenError {
    #[error("{file}:{line}: unterminated string")]
    UnterminatedString { file: String, line: usize },
    #[error("{file}:{line}: bad escape sequence '\\{0}'", .ch)]
    BadEscape { file: String, line: usize, ch: char },
}

/// One token of a record line: a bare word or a quoted string.
#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Word(String),
    Quoted(String),
}

impl Token {
    pub fn text(&self) -> &str {
        match self {
            Token::Word(s) | Token::Quoted(s) => s,
        }
    }
}

/// Canonical shortest representation of an `f64` that parses back exactly.
pub fn fmt_f64(v: f64) -> String {
    debug_assert!(v.is_finite());
    format!("{v}")
}

/// Canonical shortest representation of an `f32` that parses back exactly.
pub fn fmt_f32(v: f32) -> String {
    debug_assert!(v.is_finite());
    format!("{v}")
}

/// Fixed-precision decimal with `sig` significant digits, trailing zeros
/// trimmed. Used by the SVG writer for byte-stable output.
pub fn fmt_sig(v: f64, sig: u32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).clamp(0, 17) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Round to `sig` significant digits (used when filling numeric cells).
pub fn round_sig(v: f64, sig: u32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let exp = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(sig as i32 - 1 - exp);
    (v * scale).round() / scale
}

/// Quote a string for a record line: `"` and `\` are backslash-escaped,
/// newlines become `\n`.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

/// Split a record line into tokens. `file`/`line` only feed error messages.
pub fn tokenize(input: &str, file: &str, line: usize) -> Result<Vec<Token>, TokenError> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&ch) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
            continue;
        }
        if ch == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => {
                        return Err(TokenError::UnterminatedString {
                            file: file.to_string(),
                            line,
                        })
                    }
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some(other) => {
                            return Err(TokenError::BadEscape {
                                file: file.to_string(),
                                line,
                                ch: other,
                            })
                        }
                        None => {
                            return Err(TokenError::UnterminatedString {
                                file: file.to_string(),
                                line,
                            })
                        }
                    },
                    Some(other) => s.push(other),
                }
            }
            tokens.push(Token::Quoted(s));
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                s.push(c);
                chars.next();
            }
            tokens.push(Token::Word(s));
        }
    }
    Ok(tokens)
}

/// Join pre-rendered tokens with single spaces (the canonical writer form).
pub fn join(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{t}");
    }
    out
}
