//! Minimal S-expression reader for the SMT-LIB2 subset we emit and for
//! solver responses.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            Sexp::Atom(_) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => f.write_str(s),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (n, item) in items.iter().enumerate() {
                    if n > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SexpError {
    #[error("unbalanced ')' at byte {0}")]
    UnexpectedClose(usize),
    #[error("unterminated list")]
    Unterminated,
    #[error("unterminated string literal")]
    UnterminatedString,
}

/// Parses every top-level expression in `text`. `;` starts a line comment.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                if stack.len() < 2 {
                    return Err(SexpError::UnexpectedClose(i));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(SexpError::UnterminatedString),
                        // "" is an escaped quote inside SMT-LIB strings.
                        Some(b'"') if bytes.get(i + 1) == Some(&b'"') => i += 2,
                        Some(b'"') => break,
                        Some(_) => i += 1,
                    }
                }
                i += 1;
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(text[start..i].to_string()));
            }
            b'|' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'|' {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err(SexpError::UnterminatedString);
                }
                i += 1;
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(text[start..i].to_string()));
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b';' | b'"')
                {
                    i += 1;
                }
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(text[start..i].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError::Unterminated);
    }
    Ok(stack.pop().unwrap())
}
