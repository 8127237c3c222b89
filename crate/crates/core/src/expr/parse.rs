//! Recursive-descent parser for the problem-definition expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' literal)?
//! atom   := literal | 'x' | func '(' expr ')' | '(' expr ')'
//! func   := 'exp' | 'sqrt' | 'cbrt'
//! ```
//!
//! Literals are nonnegative decimals with an optional fraction and optional
//! exponent part (`1e-10`). Whitespace is insignificant. Implicit
//! multiplication is not supported; write `2*x`.

use super::Expr;
use std::fmt;
use thiserror::Error;

/// Parse failure with the byte offset of the unexpected input and the set of
/// tokens that would have been accepted there.
#[derive(Debug, Clone, Error, PartialEq)]
pub struct ParseDiagnostic {
    /// Byte offset into the source, 0-based; equals the source length when
    /// the input ended too early.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.offset)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Parse a single expression. Never panics on malformed input.
pub fn parse_expr(src: &str) -> Result<Expr, ParseDiagnostic> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.fail(vec!["end of input", "+", "-", "*", "/"], "unexpected input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn fail(&self, expected: Vec<&'static str>, message: &str) -> ParseDiagnostic {
        ParseDiagnostic {
            offset: self.pos,
            expected,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseDiagnostic> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.literal()?;
            self.skip_ws();
            Ok(Expr::Pow(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseDiagnostic> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.fail(vec![")"], "unclosed parenthesis"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.literal()?;
                self.skip_ws();
                Ok(Expr::Lit(v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.skip_ws();
                match name {
                    "x" => Ok(Expr::Var),
                    "exp" | "sqrt" | "cbrt" => {
                        if !self.eat(b'(') {
                            return Err(self.fail(vec!["("], "function call needs parentheses"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.fail(vec![")"], "unclosed function argument"));
                        }
                        let arg = Box::new(arg);
                        Ok(match name {
                            "exp" => Expr::Exp(arg),
                            "sqrt" => Expr::Sqrt(arg),
                            _ => Expr::Cbrt(arg),
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.fail(
                            vec!["x", "exp", "sqrt", "cbrt"],
                            &format!("unknown identifier `{name}`"),
                        ))
                    }
                }
            }
            _ => Err(self.fail(
                vec!["literal", "x", "exp", "sqrt", "cbrt", "("],
                "expected an atom",
            )),
        }
    }

    /// Nonnegative decimal literal: digits, optional fraction, optional
    /// exponent part.
    fn literal(&mut self) -> Result<f64, ParseDiagnostic> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
        }
        if self.pos == start || &self.src[start..self.pos] == b"." {
            self.pos = start;
            return Err(self.fail(vec!["literal"], "expected a number"));
        }
        // exponent part, e.g. 1e-10; only when digits follow
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // `e` belongs to something else, e.g. `2*exp(x)` typo'd
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.fail(vec!["literal"], &format!("invalid number `{text}`")))
            }
        }
    }
}
