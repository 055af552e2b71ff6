//! Complex-valued coefficient formulas in the latent variables `t1`, `t2`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?          right associative
//! atom    := number | "i" | "pi" | "e" | "t1" | "t2"
//!          | func "(" sum ")" | "(" sum ")"
//! func    := "exp" | "log" | "sin" | "cos" | "sqrt"
//! ```
//!
//! There is no implicit multiplication: `2t1` is rejected.

mod eval;
mod parse;

use std::fmt;

pub use eval::EvalError;
pub use parse::{parse, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    I,
    Pi,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    T1,
    T2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Parsed coefficient expression. Literals are nonnegative; negation is
/// always an explicit [`Expr::Neg`] node.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Owned expression together with the text it was parsed from.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientExpr {
    source: String,
    root: Expr,
}

impl CoefficientExpr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Ok(Self {
            source: source.to_string(),
            root: parse(source)?,
        })
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn evaluate(&self, t1: num_complex::Complex64, t2: num_complex::Complex64) -> Result<num_complex::Complex64, EvalError> {
        self.root.evaluate(t1, t2)
    }
}

impl std::str::FromStr for CoefficientExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Concrete syntax with the minimum parentheses needed to re-parse to the
/// same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Const(Constant::I) => f.write_str("i"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Var(Var::T1) => f.write_str("t1"),
            Expr::Var(Var::T2) => f.write_str("t2"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_child(f, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (sym, left_parens, right_parens) = match op {
                    BinOp::Add => (" + ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Sub => (" - ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Mul => ("*", a.precedence() < p, b.precedence() <= p),
                    BinOp::Div => ("/", a.precedence() < p, b.precedence() <= p),
                    BinOp::Pow => ("^", a.precedence() <= p, b.precedence() < 3),
                };
                a.write_child(f, left_parens)?;
                f.write_str(sym)?;
                b.write_child(f, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0.0f64..10.0).prop_map(Expr::Num),
            (0u32..1000).prop_map(|k| Expr::Num(k as f64)),
            Just(Expr::Const(Constant::I)),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
            Just(Expr::Var(Var::T1)),
            Just(Expr::Var(Var::T2)),
        ]
    }

    fn tree() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(5, 40, 2, |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow)
            ];
            let funcs = prop_oneof![
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Sqrt)
            ];
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (funcs, inner).prop_map(|(g, a)| Expr::Call(g, Box::new(a))),
            ]
        })
    }

    fn same(a: &Result<Complex64, EvalError>, b: &Result<Complex64, EvalError>) -> bool {
        match (a, b) {
            (Ok(x), Ok(y)) => {
                (x.re.to_bits() == y.re.to_bits() || (x.re.is_nan() && y.re.is_nan()))
                    && (x.im.to_bits() == y.im.to_bits() || (x.im.is_nan() && y.im.is_nan()))
            }
            (Err(x), Err(y)) => x == y,
            _ => false,
        }
    }

    proptest! {
        #[test]
        fn serialize_round_trips(e in tree()) {
            let text = e.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &e, "{}", text);
        }

        #[test]
        fn round_trip_preserves_value(e in tree(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let (t1, t2) = (Complex64::new(a, b), Complex64::new(b, 0.5));
            let back = parse(&e.to_string()).unwrap();
            prop_assert!(same(&e.evaluate(t1, t2), &back.evaluate(t1, t2)));
            // Pure: a second evaluation is bit-identical.
            prop_assert!(same(&e.evaluate(t1, t2), &e.evaluate(t1, t2)));
        }

        #[test]
        fn product_binds_tighter_than_sum(
            (ar, ai, br, bi, cr, ci) in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, 0.1f64..5.0, -5.0f64..5.0)
        ) {
            let c = format!("({cr:?} + {}*i)", ci.abs());
            let c = if ci < 0.0 { c.replace('+', "-") } else { c };
            let flat = format!("t1 + t2*{c}");
            let grouped = format!("t1 + (t2*{c})");
            let (t1, t2) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let x = parse(&flat).unwrap().evaluate(t1, t2).unwrap();
            let y = parse(&grouped).unwrap().evaluate(t1, t2).unwrap();
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn display_is_readable() {
        let e = parse("t1^2 + i*t2").unwrap();
        assert_eq!(e.to_string(), "t1^2.0 + i*t2");
        let e = parse("-(t1 - t2) - (t1 + 1)").unwrap();
        assert_eq!(e.to_string(), "-(t1 - t2) - (t1 + 1.0)");
        let e = parse("(-t1)^2^-3").unwrap();
        assert_eq!(e.to_string(), "(-t1)^2.0^-3.0");
    }
}
