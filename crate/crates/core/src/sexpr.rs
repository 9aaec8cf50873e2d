//! Minimal s-expression reader used for condition and effect syntax.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SexprError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected `)` at byte {0}")]
    UnexpectedClose(usize),
    #[error("trailing input at byte {0}")]
    Trailing(usize),
}

impl Sexpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items) => Some(items),
            Sexpr::Atom(_) => None,
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads exactly one s-expression.
pub fn parse(text: &str) -> Result<Sexpr, SexprError> {
    let mut reader = Reader { bytes: text.as_bytes(), pos: 0 };
    let expr = reader.read()?;
    reader.skip_ws();
    if reader.pos < reader.bytes.len() {
        return Err(SexprError::Trailing(reader.pos));
    }
    Ok(expr)
}

/// Reads a sequence of s-expressions.
pub fn parse_many(text: &str) -> Result<Vec<Sexpr>, SexprError> {
    let mut reader = Reader { bytes: text.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    loop {
        reader.skip_ws();
        if reader.pos >= reader.bytes.len() {
            return Ok(out);
        }
        out.push(reader.read()?);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                b';' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<Sexpr, SexprError> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            None => Err(SexprError::UnexpectedEnd),
            Some(b')') => Err(SexprError::UnexpectedClose(self.pos)),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        None => return Err(SexprError::UnexpectedEnd),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sexpr::List(items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(b'|') => {
                let start = self.pos;
                self.pos += 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'|' {
                    self.pos += 1;
                }
                if self.pos >= self.bytes.len() {
                    return Err(SexprError::UnexpectedEnd);
                }
                self.pos += 1;
                Ok(Sexpr::Atom(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()))
            }
            Some(_) => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && !matches!(self.bytes[self.pos], b' ' | b'\t' | b'\n' | b'\r' | b'(' | b')' | b';')
                {
                    self.pos += 1;
                }
                Ok(Sexpr::Atom(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists() {
        let e = parse("(>= (+ x (* 2 y)) 3)").unwrap();
        assert_eq!(e.to_string(), "(>= (+ x (* 2 y)) 3)");
        assert_eq!(e.list().unwrap().len(), 3);
    }

    #[test]
    fn reads_atoms_and_quoted_symbols() {
        assert_eq!(parse("  v ").unwrap(), Sexpr::Atom("v".into()));
        assert_eq!(parse("|a b|").unwrap(), Sexpr::Atom("|a b|".into()));
    }

    #[test]
    fn reads_many_with_comments() {
        let items = parse_many("sat ; done\n((x 1.0))").unwrap();
        assert_eq!(items.len(), 2);
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(parse("(a").is_err());
        assert!(parse(")").is_err());
        assert!(parse("a b").is_err());
    }
}
