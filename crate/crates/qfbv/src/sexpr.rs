//! Minimal S-expression reader for the SMT-LIB2 surface syntax.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::Atom(_) => None,
            SExpr::List(items) => Some(items),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(s) => write!(f, "{s}"),
            SExpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexprError {
    #[error("unbalanced ')'")]
    UnbalancedClose,
    #[error("unterminated list")]
    UnterminatedList,
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("unterminated quoted symbol")]
    UnterminatedQuote,
    #[error("empty input")]
    Empty,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

#[derive(Debug, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b';' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<Option<Token>, SexprError> {
        self.skip_trivia();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let c = self.bytes[self.pos];
        match c {
            b'(' => {
                self.pos += 1;
                Ok(Some(Token::Open))
            }
            b')' => {
                self.pos += 1;
                Ok(Some(Token::Close))
            }
            b'"' => {
                let start = self.pos;
                self.pos += 1;
                loop {
                    if self.pos >= self.bytes.len() {
                        return Err(SexprError::UnterminatedString);
                    }
                    if self.bytes[self.pos] == b'"' {
                        // SMT-LIB escapes a quote by doubling it
                        if self.pos + 1 < self.bytes.len() && self.bytes[self.pos + 1] == b'"' {
                            self.pos += 2;
                            continue;
                        }
                        self.pos += 1;
                        break;
                    }
                    self.pos += 1;
                }
                let text = core::str::from_utf8(&self.bytes[start..self.pos])
                    .expect("input was a str")
                    .to_string();
                Ok(Some(Token::Atom(text)))
            }
            b'|' => {
                let start = self.pos;
                self.pos += 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'|' {
                    self.pos += 1;
                }
                if self.pos >= self.bytes.len() {
                    return Err(SexprError::UnterminatedQuote);
                }
                self.pos += 1;
                let text = core::str::from_utf8(&self.bytes[start..self.pos])
                    .expect("input was a str")
                    .to_string();
                Ok(Some(Token::Atom(text)))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.bytes.len() {
                    let c = self.bytes[self.pos];
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b';' {
                        break;
                    }
                    self.pos += 1;
                }
                let text = core::str::from_utf8(&self.bytes[start..self.pos])
                    .expect("input was a str")
                    .to_string();
                Ok(Some(Token::Atom(text)))
            }
        }
    }
}

/// Parses every complete S-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SexprError> {
    let mut lexer = Lexer::new(text);
    let mut stack: Vec<Vec<SExpr>> = Vec::new();
    let mut out = Vec::new();
    while let Some(token) = lexer.next()? {
        match token {
            Token::Open => stack.push(Vec::new()),
            Token::Close => {
                let items = stack.pop().ok_or(SexprError::UnbalancedClose)?;
                let expr = SExpr::List(items);
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => out.push(expr),
                }
            }
            Token::Atom(s) => {
                let expr = SExpr::Atom(s);
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => out.push(expr),
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(SexprError::UnterminatedList);
    }
    Ok(out)
}

/// Parses exactly one S-expression.
pub fn parse_one(text: &str) -> Result<SExpr, SexprError> {
    let mut all = parse_all(text)?;
    if all.is_empty() {
        return Err(SexprError::Empty);
    }
    Ok(all.remove(0))
}

/// Returns how many more bytes of `text` would be needed to balance it:
/// 0 means at least one complete expression is present (or only trivia).
pub fn open_depth(text: &str) -> i64 {
    let bytes = text.as_bytes();
    let mut depth: i64 = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'"' => {
                i += 1;
                while i < bytes.len() {
                    if bytes[i] == b'"' {
                        if i + 1 < bytes.len() && bytes[i + 1] == b'"' {
                            i += 2;
                            continue;
                        }
                        break;
                    }
                    i += 1;
                }
            }
            b'|' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'|' {
                    i += 1;
                }
            }
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ => {}
        }
        i += 1;
    }
    depth
}
