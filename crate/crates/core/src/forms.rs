//! Differential forms on a chart.
//!
//! A form of mixed degree is stored densely over the `2^n` subsets of
//! coordinate indices: bit `i` of the index mask says `dx^i` is present, and the
//! component for a mask is the coefficient of `dx^{i1} ∧ ... ∧ dx^{ip}` with
//! `i1 < ... < ip`. [`FormField`] holds expression coefficients; [`FormJet`]
//! holds their jets at one point, and the differential operators act on
//! `FormJet`s, each derivative lowering the jet order by one.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use nalgebra::DMatrix;

use crate::chart::{self, LocalMetric};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, ScalarField};
use crate::jet::{Jet, JetError};

/// Bit mask of a strictly increasing multi-index.
pub fn mask_of(indices: &[usize]) -> usize {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

/// Indices present in `mask`, ascending.
pub fn indices_of(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask & (1 << i) != 0).collect()
}

/// `(-1)^{#{i in mask : i < j}}`: the sign of moving `dx^j` into place.
fn insert_sign(mask: usize, j: usize) -> f64 {
    if (mask & ((1 << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign that sorts `dx^A ∧ dx^B` into increasing order (masks disjoint).
fn wedge_sign(a: usize, b: usize) -> f64 {
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        inversions += (a >> (y + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Jets of all form components at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormJet {
    n: usize,
    order: usize,
    coeffs: Vec<Jet>,
}

impl FormJet {
    pub fn zero(n: usize, order: usize) -> Self {
        FormJet { n, order, coeffs: vec![Jet::zero(n, order); 1 << n] }
    }

    pub fn scalar(f: Jet) -> Self {
        let mut out = FormJet::zero(f.nvars(), f.order());
        out.coeffs[0] = f;
        out
    }

    /// Single component `f dx^{indices}`; unsorted indices are sorted with the
    /// matching sign, repeated ones give zero.
    pub fn monomial(indices: &[usize], f: Jet) -> Self {
        let mut out = FormJet::zero(f.nvars(), f.order());
        if let Some((mask, sign)) = canonical(indices) {
            out.coeffs[mask] = f.scale(sign);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, mask: usize) -> &Jet {
        &self.coeffs[mask]
    }

    pub fn component(&self, indices: &[usize]) -> Jet {
        match canonical(indices) {
            Some((mask, sign)) => self.coeffs[mask].scale(sign),
            None => Jet::zero(self.n, self.order),
        }
    }

    pub fn set(&mut self, mask: usize, f: Jet) {
        assert_eq!(f.nvars(), self.n);
        if f.order() < self.order {
            self.truncate_in_place(f.order());
        }
        self.coeffs[mask] = f.truncate(self.order);
    }

    pub fn coeffs(&self) -> &[Jet] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> FormJet {
        let order = order.min(self.order);
        FormJet { n: self.n, order, coeffs: self.coeffs.iter().map(|c| c.truncate(order)).collect() }
    }

    fn truncate_in_place(&mut self, order: usize) {
        *self = self.truncate(order);
    }

    /// Degree-`p` part.
    pub fn degree_part(&self, p: usize) -> FormJet {
        let mut out = FormJet::zero(self.n, self.order);
        for (mask, c) in self.coeffs.iter().enumerate() {
            if mask.count_ones() as usize == p {
                out.coeffs[mask] = c.clone();
            }
        }
        out
    }

    /// Degrees with a nonzero component.
    pub fn degrees(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, _)| m.count_ones() as usize)
            .collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn scale(&self, s: f64) -> FormJet {
        FormJet { n: self.n, order: self.order, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// Multiplication by a scalar function.
    pub fn mul_jet(&self, f: &Jet) -> FormJet {
        let order = self.order.min(f.order());
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { Jet::zero(self.n, order) } else { c * f })
            .collect();
        FormJet { n: self.n, order, coeffs }
    }

    /// Component values at the base point.
    pub fn values(&self) -> Vec<f64> {
        self.coeffs.iter().map(Jet::value).collect()
    }

    /// Largest component value at the base point.
    pub fn max_abs_value(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.value().abs()))
    }

    /// Largest Taylor coefficient over all components.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Jet::is_zero)
    }
}

fn canonical(indices: &[usize]) -> Option<(usize, f64)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    // bubble sort keeps track of the permutation parity
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((mask_of(&v), sign))
}

impl Add for &FormJet {
    type Output = FormJet;
    fn add(self, rhs: &FormJet) -> FormJet {
        assert_eq!(self.n, rhs.n);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        FormJet { n: self.n, order: self.order.min(rhs.order), coeffs }
    }
}

impl Sub for &FormJet {
    type Output = FormJet;
    fn sub(self, rhs: &FormJet) -> FormJet {
        assert_eq!(self.n, rhs.n);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        FormJet { n: self.n, order: self.order.min(rhs.order), coeffs }
    }
}

impl Add for FormJet {
    type Output = FormJet;
    fn add(self, rhs: FormJet) -> FormJet {
        &self + &rhs
    }
}

impl Sub for FormJet {
    type Output = FormJet;
    fn sub(self, rhs: FormJet) -> FormJet {
        &self - &rhs
    }
}

pub fn wedge(a: &FormJet, b: &FormJet) -> FormJet {
    assert_eq!(a.n, b.n);
    let mut out = FormJet::zero(a.n, a.order.min(b.order));
    for (ma, ca) in a.coeffs.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (mb, cb) in b.coeffs.iter().enumerate() {
            if ma & mb != 0 || cb.is_zero() {
                continue;
            }
            let t = ca * cb;
            out.coeffs[ma | mb] += &t.scale(wedge_sign(ma, mb));
        }
    }
    out
}

/// `i_X ω` for a vector given by its component jets.
pub fn interior(x: &[Jet], w: &FormJet) -> FormJet {
    let order = x.iter().map(Jet::order).min().unwrap_or(w.order).min(w.order);
    let mut out = FormJet::zero(w.n, order);
    for (mask, c) in w.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (e, xe) in x.iter().enumerate() {
            if mask & (1 << e) == 0 || xe.is_zero() {
                continue;
            }
            let t = xe * c;
            out.coeffs[mask & !(1 << e)] += &t.scale(insert_sign(mask, e));
        }
    }
    out
}

/// `Σ_{b,e} M[b][e] dx^b ∧ i_{∂e} ω`, the degree-preserving derivation induced
/// by an endomorphism of 1-forms; `m` is row-major in `(b, e)`.
pub fn derivation(m: &[Jet], w: &FormJet) -> FormJet {
    let n = w.n;
    let order = m.iter().map(Jet::order).min().unwrap_or(w.order).min(w.order);
    let mut out = FormJet::zero(n, order);
    for (mask, c) in w.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for e in 0..n {
            if mask & (1 << e) == 0 {
                continue;
            }
            let removed = mask & !(1 << e);
            let s1 = insert_sign(mask, e);
            for b in 0..n {
                let mbe = &m[b * n + e];
                if removed & (1 << b) != 0 || mbe.is_zero() {
                    continue;
                }
                let t = mbe * c;
                out.coeffs[removed | (1 << b)] += &t.scale(s1 * insert_sign(removed, b));
            }
        }
    }
    out
}

/// Componentwise `∂_j ω`.
pub fn partial(w: &FormJet, j: usize) -> Result<FormJet, JetError> {
    let coeffs = w.coeffs.iter().map(|c| c.diff(j)).collect::<Result<Vec<_>, _>>()?;
    Ok(FormJet { n: w.n, order: w.order - 1, coeffs })
}

pub fn exterior_d(w: &FormJet) -> Result<FormJet> {
    if w.order == 0 {
        return Err(JetError::OrderExhausted.into());
    }
    let n = w.n;
    let mut out = FormJet::zero(n, w.order - 1);
    for (mask, c) in w.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            out.coeffs[mask | (1 << j)] += &c.diff(j)?.scale(insert_sign(mask, j));
        }
    }
    Ok(out)
}

/// `∇_{∂j} ω = ∂_j ω - Σ Γ^i_{jm} dx^m ∧ i_{∂i} ω`.
pub fn covariant_partial(geo: &LocalMetric, j: usize, w: &FormJet) -> Result<FormJet> {
    let n = w.n;
    let d = partial(w, j)?;
    let m: Vec<Jet> = (0..n * n).map(|k| geo.gamma(k % n, j, k / n).clone()).collect();
    Ok(&d - &derivation(&m, w))
}

/// `∇_X ω`.
pub fn covariant_derivative(geo: &LocalMetric, x: &[Jet], w: &FormJet) -> Result<FormJet> {
    let n = w.n;
    let order = x.iter().map(Jet::order).min().unwrap_or(0).min(w.order.saturating_sub(1));
    let mut out = FormJet::zero(n, order);
    for (j, xj) in x.iter().enumerate() {
        if xj.is_zero() {
            continue;
        }
        out = &out + &covariant_partial(geo, j, w)?.mul_jet(xj);
    }
    Ok(out)
}

/// Codifferential as a covariant divergence, `δω = -Σ g^{jk} i_{∂k} ∇_{∂j} ω`.
pub fn codifferential(geo: &LocalMetric, w: &FormJet) -> Result<FormJet> {
    let n = w.n;
    if w.order == 0 {
        return Err(JetError::OrderExhausted.into());
    }
    let mut out = FormJet::zero(n, (w.order - 1).min(geo.order().saturating_sub(1)));
    for j in 0..n {
        let nab = covariant_partial(geo, j, w)?;
        // raise j: X^k = g^{jk}
        let x: Vec<Jet> = (0..n).map(|k| geo.ginv(j, k).clone()).collect();
        out = &out - &interior(&x, &nab);
    }
    Ok(out)
}

/// `D = d + δ`.
pub fn dirac(geo: &LocalMetric, w: &FormJet) -> Result<FormJet> {
    Ok(&exterior_d(w)? + &codifferential(geo, w)?)
}

/// Hodge Laplacian `dδ + δd`.
pub fn laplacian(geo: &LocalMetric, w: &FormJet) -> Result<FormJet> {
    let a = exterior_d(&codifferential(geo, w)?)?;
    let b = codifferential(geo, &exterior_d(w)?)?;
    Ok(&a + &b)
}

fn jet_det(m: &[Jet], k: usize, nvars: usize, order: usize) -> Jet {
    match k {
        0 => Jet::constant(nvars, order, 1.0),
        1 => m[0].clone(),
        2 => &(&m[0] * &m[3]) - &(&m[1] * &m[2]),
        _ => {
            let mut acc = Jet::zero(nvars, order);
            for c in 0..k {
                if m[c].is_zero() {
                    continue;
                }
                let minor: Vec<Jet> =
                    (1..k).flat_map(|r| (0..k).filter(move |&cc| cc != c).map(move |cc| (r, cc))).map(|(r, cc)| m[r * k + cc].clone()).collect();
                let t = &m[c] * &jet_det(&minor, k - 1, nvars, order);
                if c % 2 == 0 {
                    acc += &t;
                } else {
                    acc -= &t;
                }
            }
            acc
        }
    }
}

/// `det(g^{-1}[I, J])`, the metric on `Λ^p` between basis elements `dx^I`, `dx^J`.
pub fn inverse_minor(geo: &LocalMetric, i_mask: usize, j_mask: usize) -> Jet {
    let is = indices_of(i_mask);
    let js = indices_of(j_mask);
    let k = is.len();
    let m: Vec<Jet> = is.iter().flat_map(|&a| js.iter().map(move |&b| geo.ginv(a, b).clone())).collect();
    jet_det(&m, k, geo.dim(), geo.order())
}

/// Pointwise inner product induced by the metric on each degree; degrees are orthogonal.
pub fn inner(geo: &LocalMetric, a: &FormJet, b: &FormJet) -> Jet {
    let n = a.n;
    let mut acc = Jet::zero(n, a.order.min(b.order).min(geo.order()));
    for (ma, ca) in a.coeffs.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (mb, cb) in b.coeffs.iter().enumerate() {
            if mb.count_ones() != ma.count_ones() || cb.is_zero() {
                continue;
            }
            acc += &(&(ca * cb) * &inverse_minor(geo, ma, mb));
        }
    }
    acc
}

/// Hodge star with orientation given by coordinate order.
pub fn hodge_star(geo: &LocalMetric, w: &FormJet) -> FormJet {
    let n = w.n;
    let full: usize = (1 << n) - 1;
    let mut out = FormJet::zero(n, w.order.min(geo.order()));
    for j_mask in 0..=full {
        let k_mask = full & !j_mask;
        let p = k_mask.count_ones();
        let mut raised = Jet::zero(n, out.order);
        for (i_mask, c) in w.coeffs.iter().enumerate() {
            if i_mask.count_ones() != p || c.is_zero() {
                continue;
            }
            raised += &(c * &inverse_minor(geo, k_mask, i_mask));
        }
        if raised.is_zero() {
            continue;
        }
        out.coeffs[j_mask] = (geo.sqrt_det() * &raised).scale(wedge_sign(k_mask, j_mask));
    }
    out
}

/// `δ` through `(-1)^{n(p+1)+1} ⋆d⋆`, applied degree by degree.
pub fn codifferential_star(geo: &LocalMetric, w: &FormJet) -> Result<FormJet> {
    let n = w.n;
    let mut out = FormJet::zero(n, w.order.saturating_sub(1).min(geo.order().saturating_sub(1)));
    for p in 1..=n {
        let part = w.degree_part(p);
        if part.is_zero() {
            continue;
        }
        let s = if (n * (p + 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let t = hodge_star(geo, &exterior_d(&hodge_star(geo, &part))?);
        out = &out + &t.scale(s);
    }
    Ok(out)
}

/// Vector jets of `∇f`.
pub fn gradient_vector(geo: &LocalMetric, f: &Jet) -> Result<Vec<Jet>> {
    chart::gradient(geo, f)
}

/// Endomorphism `M[b][e] = Σ_a Hess_{ab} g^{ae}` of 1-forms induced by `Hess f`.
fn hessian_endomorphism(geo: &LocalMetric, f: &Jet) -> Result<Vec<Jet>> {
    let n = geo.dim();
    let hess = chart::hessian(geo, f)?;
    let mut m = Vec::with_capacity(n * n);
    for b in 0..n {
        for e in 0..n {
            let mut acc = Jet::zero(n, hess[0].order());
            for a in 0..n {
                acc += &(&hess[a * n + b] * geo.ginv(a, e));
            }
            m.push(acc);
        }
    }
    Ok(m)
}

/// Hessian operator `H_f ω = Σ Hess f(X_i, X_j) φ^j ∧ i_{X_i} ω`.
pub fn hessian_operator(geo: &LocalMetric, f: &Jet, w: &FormJet) -> Result<FormJet> {
    Ok(derivation(&hessian_endomorphism(geo, f)?, w))
}

/// Lie derivative by Cartan's formula `i_X d + d i_X`.
pub fn lie_derivative(x: &[Jet], w: &FormJet) -> Result<FormJet> {
    let a = interior(x, &exterior_d(w)?);
    let b = exterior_d(&interior(x, w))?;
    Ok(&a + &b)
}

/// `L_{∇f}` as `H_f + ∇_{∇f}`.
pub fn lie_derivative_gradient(geo: &LocalMetric, f: &Jet, w: &FormJet) -> Result<FormJet> {
    let grad = gradient_vector(geo, f)?;
    Ok(&hessian_operator(geo, f, w)? + &covariant_derivative(geo, &grad, w)?)
}

/// Orthonormal frame and dual coframe at a point, from the Cholesky factor `g = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct FramePointData {
    /// `frame[a]` holds the coordinate components of `X_a`.
    pub frame: Vec<Vec<f64>>,
    /// `coframe[a]` holds the coordinate components of `φ^a`.
    pub coframe: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
}

impl FramePointData {
    pub fn new(geo: &LocalMetric) -> Result<Self> {
        let n = geo.dim();
        let g = DMatrix::from_fn(n, n, |i, j| geo.g(i, j).value());
        let l = g.clone().cholesky().ok_or_else(|| Error::NotSpd { point: geo.point().to_vec() })?.l();
        let linv_t = l.clone().try_inverse().ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?.transpose();
        // φ^a = Σ_i L_{ia} dx^i ;  X_a = Σ_i (L^{-T})_{ia} ∂_i
        let coframe = (0..n).map(|a| (0..n).map(|i| l[(i, a)]).collect()).collect();
        let frame = (0..n).map(|a| (0..n).map(|i| linv_t[(i, a)]).collect()).collect();
        let g = (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect();
        Ok(FramePointData { frame, coframe, g })
    }

    /// Largest deviation of `g(X_a, X_b)` from `δ_ab` and of `φ^a(X_b)` from `δ^a_b`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.g.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let kron = if a == b { 1.0 } else { 0.0 };
                let gab: f64 = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| self.g[i][j] * self.frame[a][i] * self.frame[b][j])
                    .sum();
                let pair: f64 = (0..n).map(|i| self.coframe[a][i] * self.frame[b][i]).sum();
                worst = worst.max((gab - kron).abs()).max((pair - kron).abs());
            }
        }
        worst
    }

    /// `H_f ω` at the point, computed in the frame: `hess` is the covariant
    /// Hessian in coordinates and `w` the form's component values.
    pub fn hessian_operator(&self, hess: &[Vec<f64>], w: &FormJet) -> Vec<f64> {
        let n = self.g.len();
        let constant = |v: f64| Jet::constant(n, 0, v);
        let w0 = w.truncate(0);
        let mut out = FormJet::zero(n, 0);
        for i in 0..n {
            let xi: Vec<Jet> = self.frame[i].iter().map(|&v| constant(v)).collect();
            let contracted = interior(&xi, &w0);
            for j in 0..n {
                let hij: f64 = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .map(|(a, b)| hess[a][b] * self.frame[i][a] * self.frame[j][b])
                    .sum();
                if hij == 0.0 {
                    continue;
                }
                let mut phi = FormJet::zero(n, 0);
                for (k, &c) in self.coframe[j].iter().enumerate() {
                    phi.coeffs[1 << k] = constant(c);
                }
                out = &out + &wedge(&phi, &contracted).scale(hij);
            }
        }
        out.values()
    }
}

/// Graded form with expression coefficients; only increasing multi-indices are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    n: usize,
    components: BTreeMap<usize, ScalarField>,
}

impl FormField {
    pub fn zero(n: usize) -> Self {
        FormField { n, components: BTreeMap::new() }
    }

    pub fn scalar(f: ScalarField) -> Self {
        let mut out = FormField::zero(f.nvars());
        out.components.insert(0, f);
        out
    }

    /// Builds a form from `(indices, coefficient)` pairs. Unsorted indices are
    /// canonicalised with a sign; repeated indices make the term vanish.
    pub fn from_terms(n: usize, terms: Vec<(Vec<usize>, ScalarField)>) -> Result<Self> {
        let mut out = FormField::zero(n);
        for (idx, f) in terms {
            if f.nvars() != n || idx.iter().any(|&i| i >= n) {
                return Err(Error::ChartMismatch(format!("term {idx:?} does not fit a {n}-dimensional chart")));
            }
            let Some((mask, sign)) = canonical(&idx) else { continue };
            let e = if sign < 0.0 { f.expr().clone().neg() } else { f.expr().clone() };
            out.add_expr(mask, e);
        }
        Ok(out)
    }

    fn add_expr(&mut self, mask: usize, e: Expr) {
        let merged = match self.components.remove(&mask) {
            Some(prev) => Expr::bin(BinOp::Add, prev.expr().clone(), e),
            None => e,
        };
        self.components.insert(mask, ScalarField::new(merged, self.n));
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, indices: &[usize]) -> Option<&ScalarField> {
        self.components.get(&mask_of(indices))
    }

    /// Number of coefficient slots in degree `p`.
    pub fn slots(&self, p: usize) -> usize {
        binomial(self.n, p)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self.components.keys().map(|m| m.count_ones() as usize).collect();
        ds.dedup();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarField)> {
        self.components.iter().map(|(&m, f)| (indices_of(m), f))
    }

    pub fn jet(&self, point: &[f64], order: usize) -> Result<FormJet> {
        if point.len() != self.n {
            return Err(Error::ChartMismatch(format!("point has {} coordinates, form has {}", point.len(), self.n)));
        }
        let mut out = FormJet::zero(self.n, order);
        for (&mask, f) in &self.components {
            out.coeffs[mask] = f.jet(point, order)?;
        }
        Ok(out)
    }

    fn check_same(&self, other: &FormField) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ChartMismatch(format!("forms over {} and {} coordinates", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&m, f) in &other.components {
            out.add_expr(m, f.expr().clone());
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &FormField) -> Result<FormField> {
        self.check_same(other)?;
        let mut out = FormField::zero(self.n);
        for (&ma, fa) in &self.components {
            for (&mb, fb) in &other.components {
                if ma & mb != 0 {
                    continue;
                }
                let mut e = Expr::bin(BinOp::Mul, fa.expr().clone(), fb.expr().clone());
                if wedge_sign(ma, mb) < 0.0 {
                    e = e.neg();
                }
                out.add_expr(ma | mb, e);
            }
        }
        Ok(out)
    }

    /// `i_X ω` for a vector field given by coordinate components.
    pub fn interior(&self, x: &[ScalarField]) -> Result<FormField> {
        if x.len() != self.n {
            return Err(Error::ChartMismatch(format!("vector has {} components, form has {}", x.len(), self.n)));
        }
        let mut out = FormField::zero(self.n);
        for (&m, f) in &self.components {
            for (e, xe) in x.iter().enumerate() {
                if m & (1 << e) == 0 {
                    continue;
                }
                let mut t = Expr::bin(BinOp::Mul, xe.expr().clone(), f.expr().clone());
                if insert_sign(m, e) < 0.0 {
                    t = t.neg();
                }
                out.add_expr(m & !(1 << e), t);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn flat(n: usize, order: usize) -> LocalMetric {
        let names: Vec<&str> = ["x", "y", "z", "w"][..n].to_vec();
        Chart::euclidean(&names).local(&vec![0.3; n], order).unwrap()
    }

    fn var(n: usize, i: usize, at: f64) -> Jet {
        Jet::variable(n, 3, i, at)
    }

    #[test]
    fn wedge_examples() {
        let one = Jet::constant(2, 3, 1.0);
        let dx = FormJet::monomial(&[0], one.clone());
        let dy = FormJet::monomial(&[1], one.clone());
        assert!(wedge(&dx, &dx).is_zero());
        assert_eq!(wedge(&dx, &dy), wedge(&dy, &dx).scale(-1.0));
        let f = FormJet::scalar(var(2, 0, 0.5));
        assert_eq!(wedge(&f, &dy), dy.mul_jet(&var(2, 0, 0.5)));
    }

    #[test]
    fn interior_and_inner_examples() {
        let one = Jet::constant(2, 3, 1.0);
        let dxdy = FormJet::monomial(&[0, 1], one.clone());
        let ex = vec![one.clone(), Jet::zero(2, 3)];
        assert_eq!(interior(&ex, &dxdy), FormJet::monomial(&[1], one.clone()));
        let geo = flat(1, 2);
        let dx = FormJet::monomial(&[0], Jet::constant(1, 2, 1.0));
        assert_eq!(inner(&geo, &dx, &dx).value(), 1.0);
    }

    #[test]
    fn exterior_derivative_example() {
        // d(x dy) = dx ∧ dy
        let w = FormJet::monomial(&[1], var(2, 0, 0.3));
        let dw = exterior_d(&w).unwrap();
        assert_eq!(dw.component(&[0, 1]).value(), 1.0);
        assert_eq!(dw.component(&[1, 0]).value(), -1.0);
    }

    #[test]
    fn codifferential_on_line() {
        // δ(u dx) = -u' with u = x^3 at x = 0.3
        let geo = flat(1, 3);
        let u = var(1, 0, 0.3).powi(3).unwrap();
        let d = codifferential(&geo, &FormJet::monomial(&[0], u)).unwrap();
        assert!((d.coeff(0).value() + 3.0 * 0.09).abs() < 1e-15);
        let s = codifferential_star(&geo, &FormJet::monomial(&[0], var(1, 0, 0.3).powi(3).unwrap())).unwrap();
        assert!((s.coeff(0).value() + 0.27).abs() < 1e-15);
    }

    #[test]
    fn star_of_one_is_area_form() {
        let geo = flat(2, 1);
        let s = hodge_star(&geo, &FormJet::scalar(Jet::constant(2, 1, 1.0)));
        assert_eq!(s.component(&[0, 1]).value(), 1.0);
        assert_eq!(s.coeff(0).value(), 0.0);
    }

    #[test]
    fn covariant_derivative_of_function_is_directional() {
        let geo = flat(2, 2);
        let f = &var(2, 0, 0.3) * &var(2, 1, 0.3);
        let x = vec![Jet::constant(2, 2, 2.0), Jet::constant(2, 2, -1.0)];
        let r = covariant_derivative(&geo, &x, &FormJet::scalar(f)).unwrap();
        assert!((r.coeff(0).value() - (2.0 * 0.3 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn hessian_operator_kills_functions() {
        let geo = flat(2, 3);
        let f = var(2, 0, 0.3).powi(2).unwrap();
        let r = hessian_operator(&geo, &f, &FormJet::scalar(var(2, 1, 0.3))).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn form_field_canonicalises() {
        let one = ScalarField::constant(1.0, 3);
        let w = FormField::from_terms(3, vec![(vec![2, 0], one.clone()), (vec![1, 1], one.clone())]).unwrap();
        assert_eq!(w.degrees(), vec![2]);
        assert_eq!(w.slots(2), 3);
        let j = w.jet(&[0.0; 3], 0).unwrap();
        assert_eq!(j.component(&[0, 2]).value(), -1.0);
        let dx = FormField::from_terms(3, vec![(vec![0], one.clone())]).unwrap();
        assert_eq!(dx.wedge(&dx).unwrap(), FormField::zero(3));
    }
}
