//! Pratt parser for coefficient expressions.

use thiserror::Error;

use super::lexer::{tokenize, Spanned, Tok};
use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }

    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

// Binding powers. Unary minus sits between `* /` and `^`, so `-x^4` is `-(x^4)`.
const BP_ADD: u8 = 10;
const BP_MUL: u8 = 20;
const BP_NEG: u8 = 30;
const BP_POW: u8 = 40;

// Guards against stack exhaustion on adversarial input.
const MAX_DEPTH: usize = 256;

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    if toks.len() == 1 {
        return Err(ParseError::syntax(0, "expected an expression, found end of input"));
    }
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(ParseError::syntax(
            p.offset(),
            format!("expected operator or end of input, found {}", t.describe()),
        )),
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(
                self.offset(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::syntax(self.offset(), "expression nested too deeply"));
        }
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek() {
                Tok::Plus => (BinOp::Add, BP_ADD, BP_ADD + 1),
                Tok::Minus => (BinOp::Sub, BP_ADD, BP_ADD + 1),
                Tok::Star => (BinOp::Mul, BP_MUL, BP_MUL + 1),
                Tok::Slash => (BinOp::Div, BP_MUL, BP_MUL + 1),
                // Right associative; the exponent may carry a unary minus.
                Tok::Caret => (BinOp::Pow, BP_POW, BP_NEG),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::neg(self.expr(BP_NEG)?)),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, off),
            t => Err(ParseError::syntax(
                off,
                format!("expected number, 'x', function or '(', found {}", t.describe()),
            )),
        }
    }

    fn ident(&mut self, name: String, off: usize) -> Result<Expr, ParseError> {
        if name == "x" {
            return Ok(Expr::X);
        }
        if name == "pow" {
            self.expect(Tok::LParen)?;
            let a = self.expr(0)?;
            self.expect(Tok::Comma)?;
            let b = self.expr(0)?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Pow2(Box::new(a), Box::new(b)));
        }
        match Func::from_name(&name) {
            Some(f) => {
                self.expect(Tok::LParen)?;
                let a = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(Expr::call(f, a))
            }
            None => Err(ParseError::UnknownIdentifier { offset: off, name }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dangling_operator_reports_end_offset() {
        let err = parse("x +").unwrap_err();
        assert_eq!(err.offset(), 3);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn empty_input() {
        assert!(parse("").is_err());
        assert!(parse("   ").is_err());
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("2*y").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                offset: 2,
                name: "y".into()
            }
        );
        assert!(matches!(parse("tan(x)"), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn unbalanced_parens() {
        assert_eq!(parse("(x + 1").unwrap_err().offset(), 6);
        assert_eq!(parse("x + 1)").unwrap_err().offset(), 5);
        assert!(parse("sin x").is_err());
        assert!(parse("pow(x)").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let s = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(parse(&s).is_err());
        let s = "-".repeat(10_000) + "x";
        assert!(parse(&s).is_err());
    }

    #[test]
    fn negative_exponent() {
        assert_eq!(parse("2^-1").unwrap().eval(0.0).unwrap(), 0.5);
    }
}
