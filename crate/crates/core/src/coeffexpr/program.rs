//! Flat postfix form of an [`Expr`] for the integrator's inner loop.

use super::eval::{apply_bin, apply_func, apply_pow, bin_name, check, EvalError};
use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Num(f64),
    X,
    Neg,
    Bin(BinOp),
    Call(Func),
    Pow2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    max_stack: usize,
}

impl Program {
    pub fn compile(e: &Expr) -> Program {
        let mut ops = Vec::new();
        emit(e, &mut ops);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Num(_) | Op::X => depth += 1,
                Op::Neg | Op::Call(_) => {}
                Op::Bin(_) | Op::Pow2 => depth -= 1,
            }
            max_stack = max_stack.max(depth);
        }
        Program { ops, max_stack }
    }

    /// Same value as [`Expr::eval`], bit for bit.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !x.is_finite() {
            return Err(EvalError::Domain { op: "x", x });
        }
        let mut small = [0.0f64; 16];
        let mut big;
        let stack: &mut [f64] = if self.max_stack <= small.len() {
            &mut small
        } else {
            big = vec![0.0; self.max_stack];
            &mut big
        };
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Num(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Op::X => {
                    stack[sp] = x;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Call(f) => stack[sp - 1] = check(apply_func(f, stack[sp - 1]), f.name(), x)?,
                Op::Bin(b) => {
                    sp -= 1;
                    stack[sp - 1] = check(apply_bin(b, stack[sp - 1], stack[sp]), bin_name(b), x)?;
                }
                Op::Pow2 => {
                    sp -= 1;
                    stack[sp - 1] = check(apply_pow(stack[sp - 1], stack[sp]), "pow", x)?;
                }
            }
        }
        Ok(stack[0])
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => ops.push(Op::Num(*v)),
        Expr::X => ops.push(Op::X),
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Bin(op, a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::Bin(*op));
        }
        Expr::Call(f, a) => {
            emit(a, ops);
            ops.push(Op::Call(*f));
        }
        Expr::Pow2(a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::Pow2);
        }
    }
}
