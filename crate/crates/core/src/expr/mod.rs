//! Scalar expression language for metric entries and weights.
//!
//! Expressions are parsed against a fixed list of coordinate names and then
//! evaluated as [`Jet`](crate::jet::Jet)s, so every derivative the geometry
//! needs comes from exact chain-rule propagation rather than differencing.

mod eval;
mod parser;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use eval::{eval_jet, eval_value, EvalError, MAX_EVAL_ORDER};
pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    /// Integer literal; kept exact.
    Int(BigInt),
    /// Decimal literal; binary floating point.
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Int(i) => i.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => *f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 9] =
        [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Tanh, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Number),
    Var { index: usize, name: String },
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Num(Number::Int(BigInt::from(v)))
    }

    pub fn float(v: f64) -> Expr {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Num(Number::Float(-v))))
        } else {
            Expr::Num(Number::Float(v))
        }
    }

    /// Builds `p/q` (with a leading minus when negative) from an exact rational.
    pub fn rational(r: &BigRational) -> Expr {
        let abs = r.abs();
        let mag = if abs.denom().is_one() {
            Expr::Num(Number::Int(abs.numer().clone()))
        } else {
            Expr::Binary(
                BinOp::Div,
                Box::new(Expr::Num(Number::Int(abs.numer().clone()))),
                Box::new(Expr::Num(Number::Int(abs.denom().clone()))),
            )
        };
        if r.is_negative() {
            Expr::Neg(Box::new(mag))
        } else {
            mag
        }
    }

    pub fn var(index: usize, name: impl Into<String>) -> Expr {
        Expr::Var { index, name: name.into() }
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Exact rational value when the tree uses only integer literals,
    /// `+ - * /`, negation and integer powers.
    pub fn exact_value(&self) -> Option<BigRational> {
        match self {
            Expr::Num(Number::Int(i)) => Some(BigRational::from_integer(i.clone())),
            Expr::Num(Number::Float(_)) | Expr::Var { .. } | Expr::Const(_) | Expr::Call(..) => None,
            Expr::Neg(a) => a.exact_value().map(|v| -v),
            Expr::Binary(op, a, b) => {
                let x = a.exact_value()?;
                let y = b.exact_value()?;
                match op {
                    BinOp::Add => Some(x + y),
                    BinOp::Sub => Some(x - y),
                    BinOp::Mul => Some(x * y),
                    BinOp::Div => (!y.is_zero()).then(|| x / y),
                    BinOp::Pow => {
                        if !y.is_integer() {
                            return None;
                        }
                        let e = y.to_integer().to_i32()?;
                        if e < 0 && x.is_zero() {
                            return None;
                        }
                        Some(num_traits::pow::Pow::pow(x, e))
                    }
                }
            }
        }
    }

    /// True when no coordinate variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var { .. } => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Const(_) => None,
            Expr::Var { index, .. } => Some(*index),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var_index(),
            Expr::Binary(_, a, b) => match (a.max_var_index(), b.max_var_index()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// True when the variable with `index` occurs in the tree.
    pub fn depends_on(&self, index: usize) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var { index: i, .. } => *i == index,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(index),
            Expr::Binary(_, a, b) => a.depends_on(index) || b.depends_on(index),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(Number::Int(i)) => write!(f, "{i}"),
            // Debug formatting keeps a decimal point or exponent, so the
            // literal re-parses as a float rather than an exact integer.
            Expr::Num(Number::Float(x)) => {
                if x.is_sign_negative() {
                    write!(f, "({x:?})")
                } else {
                    write!(f, "{x:?}")
                }
            }
            Expr::Var { name, .. } => f.write_str(name),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(BinOp::Pow, a, b) => {
                write_child(f, a, a.precedence() < 5)?;
                f.write_str("^")?;
                write_child(f, b, b.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => unreachable!(),
                };
                write_child(f, a, a.precedence() < p)?;
                f.write_str(sym)?;
                write_child(f, b, b.precedence() <= p)
            }
        }
    }
}

/// A parsed expression bound to a coordinate system of `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: Arc<Expr>,
    nvars: usize,
}

impl ScalarField {
    pub fn new(expr: Expr, nvars: usize) -> Self {
        debug_assert!(expr.max_var_index().is_none_or(|m| m < nvars));
        ScalarField { expr: Arc::new(expr), nvars }
    }

    pub fn parse(text: &str, coords: &[impl AsRef<str>]) -> Result<Self, ParseError> {
        Ok(ScalarField::new(parse(text, coords)?, coords.len()))
    }

    pub fn constant(value: f64, nvars: usize) -> Self {
        ScalarField::new(Expr::float(value), nvars)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn jet(&self, point: &[f64], order: usize) -> Result<crate::jet::Jet, EvalError> {
        eval_jet(&self.expr, point, order)
    }

    pub fn value(&self, point: &[f64]) -> Result<f64, EvalError> {
        eval_value(&self.expr, point)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}
