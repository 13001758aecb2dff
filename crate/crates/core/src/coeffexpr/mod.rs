//! Real-valued coefficient expressions in one variable `x`.
//!
//! The grammar is closed: numeric literals, the variable `x`, the binary
//! operators `+ - * / ^`, unary minus and the functions `exp ln sin cos sqrt
//! abs pow`. See `docs/expressions.md` for the EBNF.
//!
//! ```
//! use lcspec_core::coeffexpr::Expr;
//! let e: Expr = "2*x^2 + sin(x)".parse().unwrap();
//! assert!((e.eval(1.0).unwrap() - (2.0 + 1f64.sin())).abs() < 1e-15);
//! ```

mod eval;
mod lexer;
mod parser;
mod program;

use std::fmt;
use std::str::FromStr;

pub use eval::EvalError;
pub use parser::{parse, ParseError};
pub use program::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// One-argument built-in functions. `pow` is binary and lives in [`Expr::Pow2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// `pow(a, b)`, kept distinct from `a ^ b` so printing round-trips.
    Pow2(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// True when the expression does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::X => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) | Expr::Pow2(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn compile(&self) -> Program {
        Program::compile(self)
    }

    fn is_atom(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::X | Expr::Call(..) | Expr::Pow2(..))
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Child<'a>(&'a Expr);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atom() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` is the shortest representation that parses back exactly.
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(a) => write!(f, "-{}", Child(a)),
            Expr::Bin(op, a, b) => write!(f, "{} {} {}", Child(a), op.symbol(), Child(b)),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
            Expr::Pow2(a, b) => write!(f, "pow({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(p("-x^4"), Expr::neg(Expr::bin(BinOp::Pow, Expr::X, Expr::num(4.0))));
        assert_eq!(p("-x^4").eval(2.0).unwrap(), -16.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(
            p("2^3^2"),
            Expr::bin(
                BinOp::Pow,
                Expr::num(2.0),
                Expr::bin(BinOp::Pow, Expr::num(3.0), Expr::num(2.0))
            )
        );
        assert_eq!(p("2^3^2").eval(0.0).unwrap(), 512.0);
    }

    #[test]
    fn mixed_expression_value() {
        let v = p("2*x^2 + sin(x)").eval(1.0).unwrap();
        assert!((v - 2.841_470_984_8).abs() < 1e-10);
    }

    #[test]
    fn simple_values() {
        assert_eq!(p("1").eval(3.7).unwrap(), 1.0);
        assert_eq!(p("x^4").eval(2.0).unwrap(), 16.0);
        assert_eq!(p("pow(x, 3)").eval(2.0).unwrap(), 8.0);
        assert_eq!(p("abs(-3)").eval(0.0).unwrap(), 3.0);
        assert_eq!(p("  x   -  1 ").eval(3.0).unwrap(), 2.0);
        assert_eq!(p("10 - 2 - 3").eval(0.0).unwrap(), 5.0);
        assert_eq!(p("12 / 2 / 3").eval(0.0).unwrap(), 2.0);
        assert_eq!(p("1.5e1").eval(0.0).unwrap(), 15.0);
    }

    #[test]
    fn log_of_zero_is_domain_error() {
        assert!(matches!(p("ln(x)").eval(0.0), Err(EvalError::Domain { .. })));
        assert!(matches!(p("1/x").eval(0.0), Err(EvalError::Domain { .. })));
        assert!(matches!(p("sqrt(x)").eval(-1.0), Err(EvalError::Domain { .. })));
        assert!(matches!(p("exp(x)").eval(1000.0), Err(EvalError::Overflow { .. })));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "-x^4",
            "2*x^2 + sin(x)",
            "(-x)^2",
            "pow(x - 1, 0.5) / exp(-x^2)",
            "1 - (2 - 3)",
            "-(-x)",
            "1e-7 * x",
        ] {
            let e = p(s);
            let printed = e.to_string();
            assert_eq!(p(&printed), e, "{s} -> {printed}");
        }
    }

    #[test]
    fn constant_detection() {
        assert!(p("sin(1) + 2").is_constant());
        assert!(!p("sin(x) + 2").is_constant());
    }
}
