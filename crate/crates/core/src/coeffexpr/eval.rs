use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in {op} at x = {x}")]
    Domain { op: &'static str, x: f64 },
    #[error("overflow in {op} at x = {x}")]
    Overflow { op: &'static str, x: f64 },
}

pub(crate) fn apply_func(f: Func, a: f64) -> f64 {
    match f {
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= 0.0 {
                f64::NAN
            } else {
                a.ln()
            }
        }
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Sqrt => a.sqrt(),
        Func::Abs => a.abs(),
    }
}

pub(crate) fn apply_pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        if a == 0.0 && b < 0.0 {
            return f64::NAN;
        }
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

pub(crate) fn apply_bin(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                f64::NAN
            } else {
                a / b
            }
        }
        BinOp::Pow => apply_pow(a, b),
    }
}

/// Turns a non-finite intermediate into the matching error. Inputs are always
/// finite here, so NaN means a domain violation and infinity an overflow.
pub(crate) fn check(v: f64, op: &'static str, x: f64) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::Domain { op, x })
    } else if v.is_infinite() {
        Err(EvalError::Overflow { op, x })
    } else {
        Ok(v)
    }
}

pub(crate) fn bin_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
    }
}

impl Expr {
    /// Reference tree-walking evaluation.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !x.is_finite() {
            return Err(EvalError::Domain { op: "x", x });
        }
        self.walk(x)
    }

    fn walk(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::X => Ok(x),
            Expr::Neg(a) => Ok(-a.walk(x)?),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.walk(x)?, b.walk(x)?);
                check(apply_bin(*op, a, b), bin_name(*op), x)
            }
            Expr::Call(f, a) => check(apply_func(*f, a.walk(x)?), f.name(), x),
            Expr::Pow2(a, b) => {
                let (a, b) = (a.walk(x)?, b.walk(x)?);
                check(apply_pow(a, b), "pow", x)
            }
        }
    }
}
