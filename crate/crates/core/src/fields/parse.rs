//! Infix grammar for scalar fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' int | '^' '(' int ')')?
//! atom   := number | 'x1' | 'x2' | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Nodes are built verbatim (no constant folding) so that the parsed tree
//! evaluates exactly as written.

use std::str::FromStr;
use std::sync::Arc;

use super::expr::{ScalarExpr, Var};
use super::ParseError;

impl FromStr for ScalarExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            message: message.to_string(),
            position: self.pos,
            input: self.src.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = ScalarExpr::Add(Arc::new(lhs), Arc::new(rhs));
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = ScalarExpr::Sub(Arc::new(lhs), Arc::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = ScalarExpr::Mul(Arc::new(lhs), Arc::new(rhs));
            } else if self.eat('/') {
                let rhs = self.unary()?;
                lhs = ScalarExpr::Div(Arc::new(lhs), Arc::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr, ParseError> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                ScalarExpr::Const(c) => ScalarExpr::Const(-c),
                e => ScalarExpr::Mul(Arc::new(ScalarExpr::Const(-1.0)), Arc::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let n = if self.eat('(') {
            let n = self.integer()?;
            self.expect(')')?;
            n
        } else {
            self.integer()?
        };
        Ok(ScalarExpr::Pow(Arc::new(base), n))
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        if rest.starts_with('-') || rest.starts_with('+') {
            len = 1;
        }
        len += rest[len..].chars().take_while(|c| c.is_ascii_digit()).count();
        let n = rest[..len]
            .parse::<i32>()
            .map_err(|_| self.error("expected an integer exponent"))?;
        self.pos += len;
        Ok(n)
    }

    fn atom(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let ident: String = self
                    .rest()
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                let start = self.pos;
                self.pos += ident.len();
                match ident.as_str() {
                    "x1" => Ok(ScalarExpr::Var(Var::X1)),
                    "x2" => Ok(ScalarExpr::Var(Var::X2)),
                    "sin" | "cos" | "exp" => {
                        self.expect('(')?;
                        let arg = Arc::new(self.expr()?);
                        self.expect(')')?;
                        Ok(match ident.as_str() {
                            "sin" => ScalarExpr::Sin(arg),
                            "cos" => ScalarExpr::Cos(arg),
                            _ => ScalarExpr::Exp(arg),
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier '{ident}'")))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<ScalarExpr, ParseError> {
        let bytes = self.rest().as_bytes();
        let mut len = 0;
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut k = len + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let digits = bytes[k..].iter().take_while(|b| b.is_ascii_digit()).count();
            if digits > 0 {
                len = k + digits;
            }
        }
        let text = &self.rest()[..len];
        let value = text
            .parse::<f64>()
            .map_err(|_| self.error(&format!("malformed number '{text}'")))?;
        self.pos += len;
        Ok(ScalarExpr::Const(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ScalarExpr {
        s.parse().unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1 + 2 * 3").eval([0.0, 0.0]).unwrap(), 7.0);
        assert_eq!(parse("8 / 4 / 2").eval([0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(parse("2 - 3 - 4").eval([0.0, 0.0]).unwrap(), -5.0);
        assert_eq!(parse("-x1^2").eval([3.0, 0.0]).unwrap(), -9.0);
        assert_eq!(parse("x1^-2").eval([2.0, 0.0]).unwrap(), 0.25);
        assert_eq!(parse("(x1 + 1)^(-1)").eval([1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(parse("1.5e-3 * x2").eval([0.0, 2.0]).unwrap(), 3e-3);
    }

    #[test]
    fn functions() {
        let e = parse("sin(x1) + cos(x2) * exp(0)");
        assert!((e.eval([1.0, 2.0]).unwrap() - (1f64.sin() + 2f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x3", "1 +", "sin x1", "(x1", "x1 ^ 1.5", "2 x1", "tan(x1)"] {
            assert!(bad.parse::<ScalarExpr>().is_err(), "{bad} should fail");
        }
        let err = "1 + y".parse::<ScalarExpr>().unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn printed_form_parses_back_to_same_tree() {
        for src in [
            "1 + 1 * x1^2",
            "-(x1 - x2) / (1 + x2^2)",
            "2 - (3 - x1)",
            "sin(-x1) * exp(x2 / 3)^(-2)",
            "-0.25 * x2",
        ] {
            let e = parse(src);
            assert_eq!(parse(&e.to_string()), e, "{src} -> {e}");
        }
    }
}
