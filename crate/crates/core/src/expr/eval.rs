use num_traits::ToPrimitive;
use thiserror::Error;

use super::{BinOp, Constant, Expr, Func};
use crate::jet::{Jet, JetError};

/// Highest derivative order exposed by [`eval_jet`].
pub const MAX_EVAL_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("jet order {0} unsupported (maximum {MAX_EVAL_ORDER})")]
    OrderUnsupported(usize),
    #[error("point has {found} coordinates, expression needs {needed}")]
    Dimension { needed: usize, found: usize },
}

fn domain(op: &'static str, e: JetError) -> EvalError {
    EvalError::Domain { op, detail: e.to_string() }
}

/// Evaluates `expr` at `point` with all partial derivatives up to `order`.
pub fn eval_jet(expr: &Expr, point: &[f64], order: usize) -> Result<Jet, EvalError> {
    if order > MAX_EVAL_ORDER {
        return Err(EvalError::OrderUnsupported(order));
    }
    if let Some(m) = expr.max_var_index() {
        if m >= point.len() {
            return Err(EvalError::Dimension { needed: m + 1, found: point.len() });
        }
    }
    go(expr, point, order)
}

/// Plain value of `expr` at `point`.
pub fn eval_value(expr: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    Ok(eval_jet(expr, point, 0)?.value())
}

fn go(expr: &Expr, p: &[f64], order: usize) -> Result<Jet, EvalError> {
    let n = p.len();
    Ok(match expr {
        Expr::Num(num) => Jet::constant(n, order, num.to_f64()),
        Expr::Const(Constant::Pi) => Jet::constant(n, order, std::f64::consts::PI),
        Expr::Const(Constant::E) => Jet::constant(n, order, std::f64::consts::E),
        Expr::Var { index, .. } => Jet::variable(n, order, *index, p[*index]),
        Expr::Neg(a) => -go(a, p, order)?,
        Expr::Binary(op, a, b) => {
            let x = go(a, p, order)?;
            match op {
                BinOp::Add => x + go(b, p, order)?,
                BinOp::Sub => x - go(b, p, order)?,
                BinOp::Mul => x * go(b, p, order)?,
                BinOp::Div => x.div(&go(b, p, order)?).map_err(|e| domain("division", e))?,
                BinOp::Pow => power(&x, b, p, order)?,
            }
        }
        Expr::Call(f, a) => {
            let x = go(a, p, order)?;
            match f {
                Func::Exp => x.exp(),
                Func::Log => x.ln().map_err(|e| domain("log", e))?,
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Sqrt => x.sqrt().map_err(|e| domain("sqrt", e))?,
                Func::Abs => x.abs().map_err(|e| domain("abs", e))?,
            }
        }
    })
}

fn power(base: &Jet, exponent: &Expr, p: &[f64], order: usize) -> Result<Jet, EvalError> {
    if exponent.is_constant() {
        if let Some(r) = exponent.exact_value() {
            if r.is_integer() {
                if let Some(k) = r.to_integer().to_i32() {
                    return base.powi(k).map_err(|e| domain("power", e));
                }
            }
        }
        let c = go(exponent, p, 0)?.value();
        if c.fract() == 0.0 && c.abs() < i32::MAX as f64 {
            return base.powi(c as i32).map_err(|e| domain("power", e));
        }
        return base.powf(c).map_err(|e| domain("power", e));
    }
    // general case: exp(v * log u)
    let v = go(exponent, p, order)?;
    let log_u = base.ln().map_err(|e| domain("power", e))?;
    Ok((v * log_u).exp())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn jet(text: &str, coords: &[&str], p: &[f64], order: usize) -> Jet {
        eval_jet(&parse(text, coords).unwrap(), p, order).unwrap()
    }

    #[test]
    fn square_at_two() {
        let j = jet("x^2", &["x"], &[2.0], 2);
        assert_eq!(j.value(), 4.0);
        assert_eq!(j.partial(&[0]), Some(4.0));
        assert_eq!(j.partial(&[0, 0]), Some(2.0));
    }

    #[test]
    fn exp_at_zero() {
        let j = jet("exp(x)", &["x"], &[0.0], 3);
        for k in 0..=3 {
            assert!((j.partial(&vec![0; k]).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn half_square() {
        let j = jet("-(1/2)*x^2", &["x"], &[1.0], 2);
        assert_eq!(j.value(), -0.5);
        assert_eq!(j.partial(&[0]), Some(-1.0));
        assert_eq!(j.partial(&[0, 0]), Some(-1.0));
    }

    #[test]
    fn errors() {
        let e = parse("log(x)", &["x"]).unwrap();
        assert!(matches!(eval_jet(&e, &[-1.0], 1), Err(EvalError::Domain { op: "log", .. })));
        assert_eq!(eval_jet(&e, &[1.0], 4), Err(EvalError::OrderUnsupported(4)));
        let a = parse("abs(x)", &["x"]).unwrap();
        assert!(eval_jet(&a, &[0.0], 1).is_err());
        assert_eq!(eval_value(&a, &[0.0]).unwrap(), 0.0);
        assert!(matches!(eval_jet(&a, &[], 0), Err(EvalError::Dimension { .. })));
    }

    #[test]
    fn negative_base_integer_power() {
        let j = jet("x^3", &["x"], &[-2.0], 1);
        assert_eq!(j.value(), -8.0);
        assert_eq!(j.partial(&[0]), Some(12.0));
        let j = jet("x^(-1)", &["x"], &[-2.0], 1);
        assert_eq!(j.partial(&[0]), Some(-0.25));
    }

    #[test]
    fn variable_exponent() {
        // d/dx x^x = x^x (log x + 1)
        let j = jet("x^x", &["x"], &[2.0], 1);
        assert!((j.partial(&[0]).unwrap() - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
    }
}
