//! Forward-mode jets: truncated multivariate Taylor polynomials at a point.
//!
//! A [`Jet`] of order `k` in `n` variables stores the Taylor coefficients of a
//! scalar function about a base point for every monomial of total degree at
//! most `k`. Monomials are kept in graded order, so truncating to a lower order
//! is a prefix slice. Partial derivatives are recovered from coefficients by
//! multiplying with the exponent factorials.
//!
//! Arithmetic between jets of different orders truncates to the smaller order;
//! differentiation lowers the order by one. That bookkeeping is what lets the
//! form calculus compose operators until the order budget is spent.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest order any jet in this crate is built with.
pub const MAX_JET_ORDER: usize = 4;
/// Largest number of variables supported by the monomial tables.
pub const MAX_JET_VARS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order exhausted: cannot differentiate an order-0 jet")]
    OrderExhausted,
    #[error("domain error: {0}")]
    Domain(String),
}

/// Monomial bookkeeping for a fixed `(nvars, order)`.
#[derive(Debug)]
struct MonomialTable {
    exps: Vec<Vec<u8>>,
    /// `count[d]` is the number of monomials of total degree `<= d`.
    count: Vec<usize>,
    /// Pairs `(a, b, a*b)` whose product stays within the order.
    products: Vec<(u16, u16, u16)>,
    /// `raise[m][i]` is the index of `m * x_i`, if its degree is within the order.
    raise: Vec<Vec<Option<usize>>>,
}

impl MonomialTable {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut count = Vec::with_capacity(order + 1);
        for degree in 0..=order {
            let mut current = vec![0u8; nvars];
            push_degree(&mut exps, &mut current, 0, degree);
            count.push(exps.len());
        }
        let index_of = |e: &[u8]| exps.iter().position(|x| x.as_slice() == e);
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();
        let mut products = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if degree(ea) + degree(eb) <= order {
                    let prod: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    let c = index_of(&prod).expect("product monomial in table");
                    products.push((a as u16, b as u16, c as u16));
                }
            }
        }
        let raise = exps
            .iter()
            .map(|e| {
                (0..nvars)
                    .map(|i| {
                        let mut r = e.clone();
                        r[i] += 1;
                        if degree(&r) <= order {
                            index_of(&r)
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        MonomialTable { exps, count, products, raise }
    }
}

// Enumerates all exponent vectors of exactly `remaining` total degree,
// lexicographically descending in the leading variable.
fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for take in (0..=remaining).rev() {
        current[var] = take as u8;
        push_degree(out, current, var + 1, remaining - take);
    }
    current[var] = 0;
}

fn table(nvars: usize, order: usize) -> &'static MonomialTable {
    static TABLES: [[OnceLock<MonomialTable>; MAX_JET_ORDER + 1]; MAX_JET_VARS + 1] =
        [const { [const { OnceLock::new() }; MAX_JET_ORDER + 1] }; MAX_JET_VARS + 1];
    assert!(nvars <= MAX_JET_VARS, "jets support at most {MAX_JET_VARS} variables");
    assert!(order <= MAX_JET_ORDER, "jets support at most order {MAX_JET_ORDER}");
    TABLES[nvars][order].get_or_init(|| MonomialTable::build(nvars, order))
}

/// Truncated Taylor polynomial of a scalar function at a base point.
#[derive(Clone, PartialEq)]
pub struct Jet {
    nvars: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn zero(nvars: usize, order: usize) -> Self {
        let len = table(nvars, order).exps.len();
        Jet { nvars, order, coeffs: vec![0.0; len] }
    }

    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        let mut j = Self::zero(nvars, order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `x_i` expanded about a point where it equals `value`.
    pub fn variable(nvars: usize, order: usize, i: usize, value: f64) -> Self {
        let mut j = Self::constant(nvars, order, value);
        if order >= 1 {
            let t = table(nvars, order);
            let idx = t.raise[0][i].expect("linear monomial");
            j.coeffs[idx] = 1.0;
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded monomial order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Exponent vectors matching [`Jet::coefficients`].
    pub fn monomials(&self) -> &'static [Vec<u8>] {
        &table(self.nvars, self.order).exps
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let len = table(self.nvars, order).count[order];
        Jet { nvars: self.nvars, order, coeffs: self.coeffs[..len].to_vec() }
    }

    /// Partial derivative `∂^k f / ∂x_{i1} ... ∂x_{ik}` at the base point.
    ///
    /// Returns `None` when more indices are given than the jet's order.
    pub fn partial(&self, indices: &[usize]) -> Option<f64> {
        if indices.len() > self.order {
            return None;
        }
        let mut e = vec![0u8; self.nvars];
        for &i in indices {
            e[i] += 1;
        }
        let t = table(self.nvars, self.order);
        let idx = t.exps.iter().position(|x| *x == e)?;
        let fact: f64 = e.iter().map(|&k| factorial(k as usize)).product();
        Some(self.coeffs[idx] * fact)
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars).map(|i| self.partial(&[i]).unwrap_or(0.0)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        (0..self.nvars)
            .map(|i| (0..self.nvars).map(|j| self.partial(&[i, j]).unwrap_or(0.0)).collect())
            .collect()
    }

    /// Evaluates the Taylor polynomial at `base + offset`.
    pub fn eval_offset(&self, offset: &[f64]) -> f64 {
        let t = table(self.nvars, self.order);
        t.exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                c * e.iter().zip(offset).map(|(&k, &d)| d.powi(k as i32)).product::<f64>()
            })
            .sum()
    }

    /// `∂f/∂x_i`, one order lower.
    pub fn diff(&self, i: usize) -> Result<Jet, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let t = table(self.nvars, self.order);
        let mut out = Jet::zero(self.nvars, self.order - 1);
        for (m, slot) in out.coeffs.iter_mut().enumerate() {
            if let Some(r) = t.raise[m][i] {
                *slot = (t.exps[m][i] as f64 + 1.0) * self.coeffs[r];
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { nvars: self.nvars, order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jet variable count mismatch");
        let order = self.order.min(other.order);
        let t = table(self.nvars, order);
        let mut out = Jet::zero(self.nvars, order);
        for &(a, b, c) in &t.products {
            out.coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        out
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jet variable count mismatch");
        let order = self.order.min(other.order);
        let len = table(self.nvars, order).count[order];
        Jet {
            nvars: self.nvars,
            order,
            coeffs: (0..len).map(|i| f(self.coeffs[i], other.coeffs[i])).collect(),
        }
    }

    /// Composes with a univariate function given its derivatives at the base value.
    ///
    /// `derivs[m]` must hold `f^{(m)}(self.value())` for `m = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        debug_assert!(derivs.len() > self.order);
        let mut out = Jet::constant(self.nvars, self.order, derivs[0]);
        if self.order == 0 {
            return out;
        }
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut power = delta.clone();
        let mut inv_fact = 1.0;
        for (m, &dm) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            inv_fact /= m as f64;
            if m > 1 {
                power = power.mul_jet(&delta);
            }
            out += &power.scale(dm * inv_fact);
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u <= 0.0 {
            return Err(JetError::Domain(format!("log of nonpositive value {u}")));
        }
        let mut d = vec![u.ln()];
        for m in 1..=self.order {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * factorial(m - 1) / u.powi(m as i32));
        }
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order).map(|m| cycle[m % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order).map(|m| cycle[m % 4]).collect::<Vec<_>>())
    }

    pub fn sinh(&self) -> Jet {
        let u = self.value();
        let pair = [u.sinh(), u.cosh()];
        self.compose(&(0..=self.order).map(|m| pair[m % 2]).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Jet {
        let u = self.value();
        let pair = [u.cosh(), u.sinh()];
        self.compose(&(0..=self.order).map(|m| pair[m % 2]).collect::<Vec<_>>())
    }

    pub fn tanh(&self) -> Jet {
        self.sinh().mul_jet(&self.cosh().recip().expect("cosh is positive"))
    }

    /// `u^c` for a real constant exponent; requires a positive base unless only the value is needed.
    pub fn powf(&self, c: f64) -> Result<Jet, JetError> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && self.order > 0) {
            return Err(JetError::Domain(format!("non-integer power of nonpositive value {u}")));
        }
        let mut d = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for m in 0..=self.order {
            d.push(falling * u.powf(c - m as f64));
            falling *= c - m as f64;
        }
        Ok(self.compose(&d))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.powf(0.5)
    }

    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut out = Jet::constant(self.nvars, self.order, 1.0);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(out)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u == 0.0 {
            return Err(JetError::Domain("division by zero".into()));
        }
        let mut d = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for m in 0..=self.order {
            if m > 0 {
                fact *= m as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / u.powi(m as i32 + 1));
        }
        Ok(self.compose(&d))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul_jet(&other.recip()?))
    }

    /// `|u|`; smooth only away from zero.
    pub fn abs(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u == 0.0 && self.order > 0 {
            return Err(JetError::Domain("abs is not differentiable at 0".into()));
        }
        Ok(if u < 0.0 { -self } else { self.clone() })
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = &*self - rhs;
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// Sum of jets, all sharing `nvars`; the empty sum is the zero jet of `order`.
pub fn sum_jets<'a>(nvars: usize, order: usize, items: impl IntoIterator<Item = &'a Jet>) -> Jet {
    let mut acc = Jet::zero(nvars, order);
    for j in items {
        acc += j;
    }
    acc
}
