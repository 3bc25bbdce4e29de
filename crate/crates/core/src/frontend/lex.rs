use alloc::string::String;
use alloc::vec::Vec;

use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Star,
    Plus,
    Bang,
    LParen,
    RParen,
    Yield,
    At,
    Colon,
    Comma,
    Slash,
    Arrow,
    Eq,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        use alloc::format;
        match self {
            Tok::Ident(s) => format!("identifier {s}"),
            Tok::Num(s) => format!("number {s}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Star => "'*'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Bang => "'!'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Yield => "'|-'".into(),
            Tok::At => "'@'".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::Slash => "'/'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Eq => "'='".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Tokenizes one line. `#` starts a comment running to the end of the line.
pub(crate) fn lex_line(text: &str, line: usize) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            '*' => {
                push(&mut out, Tok::Star);
                i += 1
            }
            '+' => {
                push(&mut out, Tok::Plus);
                i += 1
            }
            '!' => {
                push(&mut out, Tok::Bang);
                i += 1
            }
            '(' => {
                push(&mut out, Tok::LParen);
                i += 1
            }
            ')' => {
                push(&mut out, Tok::RParen);
                i += 1
            }
            '@' => {
                push(&mut out, Tok::At);
                i += 1
            }
            ':' => {
                push(&mut out, Tok::Colon);
                i += 1
            }
            ',' => {
                push(&mut out, Tok::Comma);
                i += 1
            }
            '/' => {
                push(&mut out, Tok::Slash);
                i += 1
            }
            '=' => {
                push(&mut out, Tok::Eq);
                i += 1
            }
            '|' if chars.get(i + 1) == Some(&'-') => {
                push(&mut out, Tok::Yield);
                i += 2
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Arrow);
                i += 2
            }
            '"' => {
                let start = i + 1;
                let Some(len) = chars[start..].iter().position(|&c| c == '"') else {
                    return Err(Diagnostic::error(line, col, "unterminated string"));
                };
                push(&mut out, Tok::Str(chars[start..start + len].iter().collect()));
                i = start + len + 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_' || chars[i] == '.') {
                    return Err(Diagnostic::error(line, col, "identifier must not begin with a digit"));
                }
                push(&mut out, Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Diagnostic::error(line, col, alloc::format!("unknown operator '{other}'")));
            }
        }
    }
    Ok(out)
}
