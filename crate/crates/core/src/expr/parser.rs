//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use thiserror::Error;

use super::{BinOp, Constant, Expr, Func, Number};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken(String),
    UnknownIdentifier(String),
    ArityMismatch { name: String, expected: usize, found: usize },
    BadNumber(String),
    EmptyInput,
    DuplicateCoordinate(String),
    ReservedCoordinate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at byte offset {offset}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedChar(c) => format!("syntax error: unexpected character {c:?}"),
        ParseErrorKind::UnexpectedEnd => "syntax error: unexpected end of input".into(),
        ParseErrorKind::UnexpectedToken(t) => format!("syntax error: unexpected token {t:?}"),
        ParseErrorKind::UnknownIdentifier(n) => format!("unknown identifier {n:?}"),
        ParseErrorKind::ArityMismatch { name, expected, found } => {
            format!("arity mismatch: {name} takes {expected} argument(s), got {found}")
        }
        ParseErrorKind::BadNumber(s) => format!("malformed number {s:?}"),
        ParseErrorKind::EmptyInput => "empty expression".into(),
        ParseErrorKind::DuplicateCoordinate(n) => format!("duplicate coordinate name {n:?}"),
        ParseErrorKind::ReservedCoordinate(n) => format!("coordinate name {n:?} is a reserved function name"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Number),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
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
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, start, end: i + 1 });
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let mut is_float = text[start..i].contains('.');
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                // exponent only when followed by digits (optionally signed)
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                    is_float = true;
                }
            }
            let lit = &text[start..i];
            let num = if is_float {
                lit.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Number::Float)
            } else {
                lit.parse::<BigInt>().ok().map(Number::Int)
            };
            let num = num.ok_or(ParseError { kind: ParseErrorKind::BadNumber(lit.into()), offset: start })?;
            out.push(Token { tok: Tok::Num(num), start, end: i });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].into()), start, end: i });
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), offset: start });
        }
    }
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<Token>,
    pos: usize,
    coords: &'a [S],
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    // Offset where the next token starts, or just past the last one at end of input.
    fn here(&self) -> usize {
        match self.toks.get(self.pos) {
            Some(t) => t.start,
            None => self.toks.last().map_or(0, |t| t.end),
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.toks.get(self.pos) {
            None => ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: self.here() },
            Some(t) => ParseError { kind: ParseErrorKind::UnexpectedToken(token_text(&t.tok)), offset: t.start },
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.toks.get(self.pos).cloned() else {
            return Err(self.unexpected());
        };
        match tok.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let called = self.peek() == Some(&Tok::LParen);
                if let Some(func) = Func::from_name(&name) {
                    if !called {
                        return Err(ParseError {
                            kind: ParseErrorKind::ArityMismatch { name, expected: 1, found: 0 },
                            offset: tok.start,
                        });
                    }
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != 1 {
                        return Err(ParseError {
                            kind: ParseErrorKind::ArityMismatch { name, expected: 1, found: args.len() },
                            offset: tok.start,
                        });
                    }
                    return Ok(Expr::call(func, args.pop().unwrap()));
                }
                let value = if let Some(index) = self.coords.iter().position(|c| c.as_ref() == name) {
                    Expr::Var { index, name: name.clone() }
                } else if name == "pi" {
                    Expr::Const(Constant::Pi)
                } else if name == "e" {
                    Expr::Const(Constant::E)
                } else {
                    return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), offset: tok.start });
                };
                if called {
                    return Err(ParseError {
                        kind: ParseErrorKind::ArityMismatch { name, expected: 0, found: 1 },
                        offset: tok.start,
                    });
                }
                Ok(value)
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn token_text(t: &Tok) -> String {
    match t {
        Tok::Num(Number::Int(i)) => i.to_string(),
        Tok::Num(Number::Float(f)) => f.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
    }
}

/// Parses `text` with identifiers resolved against `coords` (which shadow `pi` and `e`).
pub fn parse<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Expr, ParseError> {
    for (i, c) in coords.iter().enumerate() {
        let c = c.as_ref();
        if coords[..i].iter().any(|d| d.as_ref() == c) {
            return Err(ParseError { kind: ParseErrorKind::DuplicateCoordinate(c.into()), offset: 0 });
        }
        if Func::from_name(c).is_some() {
            return Err(ParseError { kind: ParseErrorKind::ReservedCoordinate(c.into()), offset: 0 });
        }
    }
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::EmptyInput, offset: 0 });
    }
    let mut p = Parser { toks, pos: 0, coords };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Expr {
        Expr::int(v)
    }

    #[test]
    fn unary_minus_binds_tighter_than_product() {
        let s = Expr::var(0, "s");
        let e = parse("-(1/2)*s^2", &["s"]).unwrap();
        let want = Expr::bin(
            BinOp::Mul,
            Expr::bin(BinOp::Div, int(1), int(2)).neg(),
            Expr::bin(BinOp::Pow, s, int(2)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn power_above_unary_minus() {
        let x = Expr::var(0, "x");
        assert_eq!(parse("-x^2", &["x"]).unwrap(), Expr::bin(BinOp::Pow, x.clone(), int(2)).neg());
        // right associative, exponent may carry its own sign
        assert_eq!(
            parse("x^-2^3", &["x"]).unwrap(),
            Expr::bin(BinOp::Pow, x, Expr::bin(BinOp::Pow, int(2), int(3)).neg())
        );
    }

    #[test]
    fn function_call() {
        let e = parse("exp(s)", &["s", "x1"]).unwrap();
        assert_eq!(e, Expr::call(Func::Exp, Expr::var(0, "s")));
    }

    #[test]
    fn incomplete_input_offset() {
        let err = parse("s + ", &["s"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("2*y", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn arity_errors() {
        let err = parse("sin(x, x)", &["x"]).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { found: 2, .. }));
        let err = parse("exp + 1", &["x"]).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { found: 0, .. }));
        let err = parse("x(2)", &["x"]).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { expected: 0, .. }));
    }

    #[test]
    fn literals() {
        assert_eq!(parse("2.5", &["x"]).unwrap(), Expr::Num(Number::Float(2.5)));
        assert_eq!(parse("1e-3", &["x"]).unwrap(), Expr::Num(Number::Float(1e-3)));
        assert_eq!(parse("12", &["x"]).unwrap(), int(12));
        assert!(parse("1.2.3", &["x"]).is_err());
        // coordinates shadow the constant `e`
        assert_eq!(parse("e", &["e"]).unwrap(), Expr::var(0, "e"));
        assert_eq!(parse("e", &["x"]).unwrap(), Expr::Const(Constant::E));
    }

    #[test]
    fn bad_coordinates() {
        assert!(matches!(parse("x", &["x", "x"]).unwrap_err().kind, ParseErrorKind::DuplicateCoordinate(_)));
        assert!(matches!(parse("x", &["exp"]).unwrap_err().kind, ParseErrorKind::ReservedCoordinate(_)));
        assert_eq!(parse("   ", &["x"]).unwrap_err().kind, ParseErrorKind::EmptyInput);
    }

    #[test]
    fn trailing_garbage() {
        let err = parse("(x))", &["x"]).unwrap_err();
        assert_eq!(err.offset, 3);
        let err = parse("x $ 1", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
    }
}
