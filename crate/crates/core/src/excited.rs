//! Exact ladder algebra on the span of `h^i` and `h^i dh`.
//!
//! When `Δ⁰h = α` and `|dh|² = 2(γ - αh)`, the creation and annihilation
//! operators map the two sectors into each other with constant coefficients,
//! so the excited states `φ_k = (A†)^k 1` are coefficient tables in `h`.
//! All factors are in `ℚ[√2]` for rational `α, γ`; [`QSqrt2`] keeps them exact
//! and `f64` is available for irrational constants.

use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Result;
use crate::forms::FormJet;
use crate::weighted::WeightedPoint;

/// `p + q√2` with rational `p`, `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub p: BigRational,
    pub q: BigRational,
}

impl QSqrt2 {
    pub fn new(p: BigRational, q: BigRational) -> Self {
        QSqrt2 { p, q }
    }

    pub fn rational(p: BigRational) -> Self {
        QSqrt2 { p, q: BigRational::zero() }
    }

    pub fn int(v: i64) -> Self {
        QSqrt2::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// `(p - q√2)`, so that `x * x.conjugate()` is rational.
    pub fn conjugate(&self) -> Self {
        QSqrt2 { p: self.p.clone(), q: -self.q.clone() }
    }

    /// `p² - 2q²`.
    pub fn norm(&self) -> BigRational {
        &self.p * &self.p - BigRational::from_integer(2.into()) * &self.q * &self.q
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.p.is_zero(), self.q.is_zero()) {
            (_, true) => write!(f, "{}", self.p),
            (true, false) => write!(f, "{}*sqrt(2)", self.q),
            (false, false) => {
                let sign = if self.q.is_negative() { '-' } else { '+' };
                write!(f, "{} {sign} {}*sqrt(2)", self.p, self.q.abs())
            }
        }
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 { p: self.p + o.p, q: self.q + o.q }
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 { p: self.p - o.p, q: self.q - o.q }
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(2.into());
        QSqrt2 { p: &self.p * &o.p + two * &self.q * &o.q, q: &self.p * &o.q + &self.q * &o.p }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { p: -self.p, q: -self.q }
    }
}

/// Coefficient ring for the ladder tables.
pub trait LadderScalar:
    Clone + PartialEq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `2^{1/2}`.
    fn sqrt2() -> Self;
    /// `2^{-1/2}`.
    fn inv_sqrt2() -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Rational and `√2` parts as text, for CSV export.
    fn parts(&self) -> (String, String);
    /// Whether arithmetic in this ring is exact.
    const EXACT: bool;
}

impl LadderScalar for QSqrt2 {
    fn zero() -> Self {
        QSqrt2::int(0)
    }
    fn from_i64(v: i64) -> Self {
        QSqrt2::int(v)
    }
    fn sqrt2() -> Self {
        QSqrt2::new(BigRational::zero(), BigRational::one())
    }
    fn inv_sqrt2() -> Self {
        QSqrt2::new(BigRational::zero(), BigRational::new(1.into(), 2.into()))
    }
    fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }
    fn to_f64(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN) + self.q.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
    fn parts(&self) -> (String, String) {
        (self.p.to_string(), self.q.to_string())
    }
    const EXACT: bool = true;
}

impl LadderScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }
    fn inv_sqrt2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parts(&self) -> (String, String) {
        (format!("{self:?}"), "0".to_string())
    }
    const EXACT: bool = false;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Functions `Σ a_i h^i`.
    Even,
    /// One-forms `Σ b_i h^i dh`.
    Odd,
}

impl Parity {
    fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Coefficients of a state in one sector, indexed by the power of `h`.
#[derive(Debug, Clone)]
pub struct StateTable<S> {
    pub parity: Parity,
    pub coeffs: Vec<S>,
}

impl<S: LadderScalar> StateTable<S> {
    pub fn new(parity: Parity, coeffs: Vec<S>) -> Self {
        let mut t = StateTable { parity, coeffs };
        t.trim();
        t
    }

    pub fn ground() -> Self {
        StateTable::new(Parity::Even, vec![S::from_i64(1)])
    }

    fn zeros(parity: Parity, len: usize) -> Self {
        StateTable { parity, coeffs: vec![S::zero(); len] }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(S::is_zero) {
            self.coeffs.pop();
        }
    }

    fn add_at(&mut self, i: usize, v: S) {
        if self.coeffs.len() <= i {
            self.coeffs.resize(i + 1, S::zero());
        }
        self.coeffs[i] = self.coeffs[i].clone() + v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(S::is_zero)
    }

    /// Highest power of `h` with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn scale(&self, s: &S) -> Self {
        StateTable::new(self.parity, self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// `self - other`; a zero table of either parity is accepted.
    pub fn sub(&self, other: &Self) -> Self {
        let parity = if self.is_zero() { other.parity } else { self.parity };
        assert!(other.is_zero() || self.is_zero() || other.parity == self.parity, "sector mismatch");
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |t: &Self, i: usize| t.coeffs.get(i).cloned().unwrap_or_else(S::zero);
        StateTable::new(parity, (0..len).map(|i| get(self, i) - get(other, i)).collect())
    }

    /// Form value at a point, with `h` and `dh` taken from `p`.
    pub fn to_form(&self, p: &WeightedPoint) -> FormJet {
        let n = p.dim();
        let mut poly = crate::jet::Jet::zero(n, p.h.order());
        for (i, c) in self.coeffs.iter().enumerate() {
            poly += &p.power(i as u32).scale(c.to_f64());
        }
        match self.parity {
            Parity::Even => FormJet::scalar(poly),
            Parity::Odd => p.dh.mul_jet(&poly),
        }
    }
}

impl<S: LadderScalar> PartialEq for StateTable<S> {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.is_zero(), other.is_zero());
        if a || b {
            return a && b;
        }
        self.parity == other.parity && self.coeffs == other.coeffs
    }
}

/// Ladder operators on tables for fixed constants `α`, `γ`.
#[derive(Debug, Clone)]
pub struct Ladder<S> {
    pub alpha: S,
    pub gamma: S,
}

impl<S: LadderScalar> Ladder<S> {
    pub fn new(alpha: S, gamma: S) -> Self {
        Ladder { alpha, gamma }
    }

    /// Creation operator, with `|dh|²` and `Δ⁰h` already reduced.
    pub fn adagger(&self, t: &StateTable<S>) -> StateTable<S> {
        let r2 = S::sqrt2();
        let ir2 = S::inv_sqrt2();
        let mut out = StateTable::zeros(t.parity.flip(), t.coeffs.len() + 1);
        for (i, c) in t.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let fi = S::from_i64(i as i64);
            match t.parity {
                Parity::Even => {
                    // h^i -> (i/√2) h^{i-1} dh + √2 h^i dh
                    if i > 0 {
                        out.add_at(i - 1, ir2.clone() * fi.clone() * c.clone());
                    }
                    out.add_at(i, r2.clone() * c.clone());
                }
                Parity::Odd => {
                    // h^i dh -> -(i/√2) h^{i-1}|dh|² - √2 h^i |dh|² + (1/√2) h^i Δ⁰h
                    let two = S::from_i64(2);
                    if i > 0 {
                        out.add_at(i - 1, -(r2.clone() * fi.clone() * self.gamma.clone() * c.clone()));
                    }
                    let mid = r2.clone() * fi.clone() * self.alpha.clone()
                        - two.clone() * r2.clone() * self.gamma.clone()
                        + ir2.clone() * self.alpha.clone();
                    out.add_at(i, mid * c.clone());
                    out.add_at(i + 1, two * r2.clone() * self.alpha.clone() * c.clone());
                }
            }
        }
        out.trim();
        out
    }

    /// Annihilation operator.
    pub fn a(&self, t: &StateTable<S>) -> StateTable<S> {
        let ir2 = S::inv_sqrt2();
        let mut out = StateTable::zeros(t.parity.flip(), t.coeffs.len());
        for (i, c) in t.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let fi = S::from_i64(i as i64);
            match t.parity {
                Parity::Even => {
                    // h^i -> (i/√2) h^{i-1} dh
                    if i > 0 {
                        out.add_at(i - 1, ir2.clone() * fi * c.clone());
                    }
                }
                Parity::Odd => {
                    // h^i dh -> (1/√2)(-i h^{i-1}|dh|² + h^i Δ⁰h)
                    let two = S::from_i64(2);
                    if i > 0 {
                        out.add_at(i - 1, -(ir2.clone() * two.clone() * fi.clone() * self.gamma.clone() * c.clone()));
                    }
                    let mid = two * fi * self.alpha.clone() + self.alpha.clone();
                    out.add_at(i, ir2.clone() * mid * c.clone());
                }
            }
        }
        out.trim();
        out
    }

    /// `N = A†A`.
    pub fn n(&self, t: &StateTable<S>) -> StateTable<S> {
        self.adagger(&self.a(t))
    }

    /// `AA† - A†A`.
    pub fn commutator(&self, t: &StateTable<S>) -> StateTable<S> {
        self.a(&self.adagger(t)).sub(&self.adagger(&self.a(t)))
    }

    /// `φ_0, ..., φ_kmax`.
    pub fn states(&self, kmax: usize) -> Vec<StateTable<S>> {
        let mut out = vec![StateTable::ground()];
        for k in 0..kmax {
            let next = self.adagger(&out[k]);
            out.push(next);
        }
        out
    }

    /// Leading coefficient of `φ_{2j}` as a polynomial in `h`.
    pub fn leading_coefficient(&self, j: usize) -> S {
        let states = self.states(2 * j);
        let t = &states[2 * j];
        t.degree().map(|d| t.coeffs[d].clone()).unwrap_or_else(S::zero)
    }
}

/// Residuals of the ladder identities for `k <= kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderCheck {
    /// `Nφ_k = αkφ_k`.
    pub eigen: bool,
    /// `Aφ_k = αkφ_{k-1}` (and `Aφ_0 = 0`).
    pub lowering: bool,
    /// `(AA† - A†A)φ_k = αφ_k`.
    pub commutator: bool,
    /// `A(A†φ_k) = α(k+1)φ_k`.
    pub raise_then_lower: bool,
    /// `φ_{2j}` even with degree `j`; `φ_{2j+1}` odd with degree `j`.
    pub shape: bool,
    /// Largest absolute coefficient deviation over all identities (zero when exact).
    pub max_residual: f64,
}

impl LadderCheck {
    pub fn pass(&self) -> bool {
        self.eigen && self.lowering && self.commutator && self.raise_then_lower && self.shape
    }
}

fn deviation<S: LadderScalar>(a: &StateTable<S>, b: &StateTable<S>) -> f64 {
    let d = a.sub(b);
    d.coeffs.iter().fold(0.0f64, |m, c| m.max(c.to_f64().abs()))
}

pub fn check_ladder<S: LadderScalar>(ladder: &Ladder<S>, kmax: usize, tolerance: f64) -> LadderCheck {
    let states = ladder.states(kmax + 1);
    let mut out = LadderCheck {
        eigen: true,
        lowering: true,
        commutator: true,
        raise_then_lower: true,
        shape: true,
        max_residual: 0.0,
    };
    let ok = |a: &StateTable<S>, b: &StateTable<S>, worst: &mut f64| {
        let dev = deviation(a, b);
        *worst = worst.max(dev);
        if S::EXACT {
            a == b
        } else {
            dev <= tolerance
        }
    };
    for k in 0..=kmax {
        let phi = &states[k];
        let ak = ladder.alpha.clone() * S::from_i64(k as i64);
        let mut worst = out.max_residual;
        out.eigen &= ok(&ladder.n(phi), &phi.scale(&ak), &mut worst);
        let lowered = ladder.a(phi);
        let expect = if k == 0 { StateTable::new(Parity::Odd, vec![]) } else { states[k - 1].scale(&ak) };
        out.lowering &= ok(&lowered, &expect, &mut worst);
        out.commutator &= ok(&ladder.commutator(phi), &phi.scale(&ladder.alpha), &mut worst);
        let ak1 = ladder.alpha.clone() * S::from_i64(k as i64 + 1);
        out.raise_then_lower &= ok(&ladder.a(&states[k + 1]), &phi.scale(&ak1), &mut worst);
        out.max_residual = worst;
        let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        out.shape &= phi.parity == parity && phi.degree() == Some(k / 2);
    }
    out
}

/// Writes `k, i, p, q` rows (coefficient of `h^i` in `φ_k` is `p + q√2`).
pub fn write_csv<S: LadderScalar>(states: &[StateTable<S>], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "i", "p", "q"])?;
    for (k, t) in states.iter().enumerate() {
        for (i, c) in t.coeffs.iter().enumerate() {
            let (p, q) = c.parts();
            w.write_record([k.to_string(), i.to_string(), p, q])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> QSqrt2 {
        QSqrt2::rational(BigRational::new(n.into(), d.into()))
    }

    fn ladder(a: (i64, i64), g: (i64, i64)) -> Ladder<QSqrt2> {
        Ladder::new(q(a.0, a.1), q(g.0, g.1))
    }

    #[test]
    fn ring_laws() {
        let x = QSqrt2::new(BigRational::new(3.into(), 2.into()), BigRational::new((-1).into(), 3.into()));
        assert_eq!(x.clone() * x.conjugate(), QSqrt2::rational(x.norm()));
        assert_eq!(QSqrt2::sqrt2() * QSqrt2::inv_sqrt2(), QSqrt2::int(1));
        assert_eq!(QSqrt2::sqrt2() * QSqrt2::sqrt2(), QSqrt2::int(2));
    }

    #[test]
    fn first_states() {
        let l = ladder((3, 2), (2, 1));
        let s = l.states(2);
        assert_eq!(s[1], StateTable::new(Parity::Odd, vec![QSqrt2::sqrt2()]));
        // φ2 = (α - 4γ) + 4α h
        assert_eq!(s[2], StateTable::new(Parity::Even, vec![q(3, 2) - q(8, 1), q(6, 1)]));
        let l = ladder((1, 1), (0, 1));
        assert_eq!(l.states(2)[2], StateTable::new(Parity::Even, vec![q(1, 1), q(4, 1)]));
    }

    #[test]
    fn lowering_examples() {
        let l = ladder((1, 1), (0, 1));
        assert!(l.a(&StateTable::ground()).is_zero());
        let s = l.states(1);
        assert_eq!(l.a(&s[1]), s[0].scale(&l.alpha));
    }

    #[test]
    fn commutator_on_powers() {
        let l = ladder((2, 1), (-1, 1));
        for i in 0..6 {
            let mut c = vec![QSqrt2::int(0); i + 1];
            c[i] = QSqrt2::int(1);
            let t = StateTable::new(Parity::Even, c);
            assert_eq!(l.commutator(&t), t.scale(&l.alpha));
        }
        let s = ladder((3, 2), (2, 1));
        let phi5 = &s.states(5)[5];
        assert_eq!(s.commutator(phi5), phi5.scale(&s.alpha));
    }

    #[test]
    fn leading_coefficients() {
        let l = ladder((1, 1), (0, 1));
        assert_eq!(l.leading_coefficient(0), QSqrt2::int(1));
        assert_eq!(l.leading_coefficient(1), QSqrt2::int(4));
        for j in 0..=6 {
            assert!(!l.leading_coefficient(j).is_zero());
        }
        let l = ladder((3, 2), (2, 1));
        assert_eq!(l.leading_coefficient(1), q(6, 1));
    }

    #[test]
    fn float_fallback_agrees() {
        let exact = ladder((3, 2), (2, 1)).states(8);
        let approx = Ladder::new(1.5f64, 2.0).states(8);
        for (e, a) in exact.iter().zip(&approx) {
            for (x, y) in e.coeffs.iter().zip(&a.coeffs) {
                assert!((x.to_f64() - y).abs() <= 1e-9 * x.to_f64().abs().max(1.0));
            }
        }
        let chk = check_ladder(&Ladder::new(std::f64::consts::PI, std::f64::consts::E), 8, 1e-6);
        assert!(chk.pass(), "{chk:?}");
    }

    #[test]
    fn csv_export() {
        let s = ladder((1, 1), (0, 1)).states(2);
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k,i,p,q\n0,0,1,0\n1,0,0,1\n2,0,1,0\n2,1,4,0\n");
    }
}
