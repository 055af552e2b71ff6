use std::f64::consts::{E, PI};

use num_complex::Complex64;
use thiserror::Error;

use super::{BinOp, Constant, Expr, Func, Var};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
}

/// Integer exponents up to this magnitude use repeated squaring.
const MAX_INTEGER_POWER: f64 = 64.0;

fn powi(base: Complex64, k: i64) -> Result<Complex64, EvalError> {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut b = base;
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    if k < 0 {
        if acc == Complex64::new(0.0, 0.0) {
            return Err(EvalError::DivisionByZero);
        }
        acc = acc.inv();
    }
    Ok(acc)
}

fn pow(base: Complex64, exp: Complex64) -> Result<Complex64, EvalError> {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= MAX_INTEGER_POWER {
        return powi(base, exp.re as i64);
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exp.re > 0.0 {
            Ok(base)
        } else {
            Err(EvalError::LogOfZero)
        };
    }
    Ok((exp * base.ln()).exp())
}

impl Expr {
    /// Complex value at `(t1, t2)`; `log`, `sqrt` and non-integer powers use
    /// principal branches.
    pub fn evaluate(&self, t1: Complex64, t2: Complex64) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Num(x) => Complex64::new(*x, 0.0),
            Expr::Const(Constant::I) => Complex64::new(0.0, 1.0),
            Expr::Const(Constant::Pi) => Complex64::new(PI, 0.0),
            Expr::Const(Constant::E) => Complex64::new(E, 0.0),
            Expr::Var(Var::T1) => t1,
            Expr::Var(Var::T2) => t2,
            Expr::Neg(a) => -a.evaluate(t1, t2)?,
            Expr::Bin(op, a, b) => {
                let x = a.evaluate(t1, t2)?;
                let y = b.evaluate(t1, t2)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::DivisionByZero);
                        }
                        x.fdiv(y)
                    }
                    BinOp::Pow => pow(x, y)?,
                }
            }
            Expr::Call(func, a) => {
                let x = a.evaluate(t1, t2)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::LogOfZero);
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        })
    }
}
