//! Riemannian data on a single coordinate chart.
//!
//! A [`Chart`] owns coordinate names, a domain box (with optional periodic
//! directions) and the metric entries as expressions. [`LocalMetric`] expands
//! the metric about a point as jets, from which inverse metric, volume density,
//! Christoffel symbols and Ricci curvature follow exactly. The scalar operators
//! use the nonnegative sign convention: on the real line `Δ⁰ = -d²/dx²`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, ScalarField};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub name: String,
    /// Lower end of the domain; `-inf` when unbounded.
    pub lo: f64,
    /// Upper end of the domain; `+inf` when unbounded.
    pub hi: f64,
    /// Period length for compact (circle) directions.
    pub period: Option<f64>,
}

impl Coordinate {
    pub fn unbounded(name: impl Into<String>) -> Self {
        Coordinate { name: name.into(), lo: f64::NEG_INFINITY, hi: f64::INFINITY, period: None }
    }

    pub fn interval(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Coordinate { name: name.into(), lo, hi, period: None }
    }

    pub fn periodic(name: impl Into<String>, lo: f64, period: f64) -> Self {
        Coordinate { name: name.into(), lo, hi: lo + period, period: Some(period) }
    }

    pub fn is_unbounded(&self) -> bool {
        self.period.is_none() && (self.lo.is_infinite() || self.hi.is_infinite())
    }

    /// Finite interval used for sampling and quadrature.
    pub fn truncated(&self, radius: f64) -> (f64, f64) {
        (self.lo.max(-radius), self.hi.min(radius))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Vec<Coordinate>,
    metric: Vec<ScalarField>,
    oriented: bool,
}

impl Chart {
    /// Builds a chart from coordinates and a full `n x n` metric matrix.
    ///
    /// Off-diagonal entries must agree structurally (`g_ij` and `g_ji` parse to
    /// the same tree).
    pub fn new(coords: Vec<Coordinate>, metric: Vec<Vec<Expr>>) -> Result<Self> {
        let n = coords.len();
        if n == 0 || n > crate::jet::MAX_JET_VARS {
            return Err(Error::InvalidChart(format!("dimension {n} outside 1..={}", crate::jet::MAX_JET_VARS)));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate {:?}", c.name)));
            }
            if !(c.lo < c.hi) {
                return Err(Error::InvalidChart(format!("empty domain for {:?}", c.name)));
            }
            if let Some(p) = c.period {
                if !(p > 0.0) || !c.lo.is_finite() || (c.hi - c.lo - p).abs() > 1e-12 * p.max(1.0) {
                    return Err(Error::InvalidChart(format!("bad period for {:?}", c.name)));
                }
            }
        }
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChart(format!("metric must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if metric[i][j] != metric[j][i] {
                    return Err(Error::InvalidChart(format!("metric entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        let metric = metric.into_iter().flatten().map(|e| ScalarField::new(e, n)).collect();
        Ok(Chart { coords, metric, oriented: true })
    }

    /// Parses metric entries written in terms of the coordinate names.
    pub fn from_strings(coords: Vec<Coordinate>, metric: &[Vec<&str>]) -> Result<Self> {
        let names: Vec<String> = coords.iter().map(|c| c.name.clone()).collect();
        let parsed = metric
            .iter()
            .map(|row| row.iter().map(|t| parse(t, &names)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Chart::new(coords, parsed)
    }

    /// Flat metric on unbounded coordinates with the given names.
    pub fn euclidean(names: &[&str]) -> Self {
        let n = names.len();
        let coords = names.iter().map(|&s| Coordinate::unbounded(s)).collect();
        let metric = (0..n)
            .map(|i| (0..n).map(|j| Expr::int(i64::from(i == j))).collect())
            .collect();
        Chart::new(coords, metric).expect("euclidean chart is valid")
    }

    pub fn with_orientation(mut self, oriented: bool) -> Self {
        self.oriented = oriented;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn names(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.name.clone()).collect()
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn metric_entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.metric[i * self.dim() + j]
    }

    /// Parses an expression over this chart's coordinates.
    pub fn scalar(&self, text: &str) -> Result<ScalarField> {
        Ok(ScalarField::parse(text, &self.names())?)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && self.coords.iter().zip(point).all(|(c, &x)| c.period.is_some() || (c.lo <= x && x <= c.hi))
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::ChartMismatch(format!("point has {} coordinates, chart has {}", point.len(), self.dim())));
        }
        if !self.contains(point) {
            return Err(Error::Domain(format!("point {point:?} outside chart domain")));
        }
        Ok(())
    }

    /// Truncated domain box used for sampling; periodic directions span one period.
    pub fn sample_box(&self, radius: f64) -> Vec<(f64, f64)> {
        self.coords.iter().map(|c| c.truncated(radius)).collect()
    }

    pub fn local(&self, point: &[f64], order: usize) -> Result<LocalMetric> {
        LocalMetric::new(self, point, order)
    }

    pub fn metric_at(&self, point: &[f64]) -> Result<MetricPointData> {
        let geo = self.local(point, 2)?;
        let n = self.dim();
        let val = |v: &[Jet]| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| v[i * n + j].value()).collect()).collect()
        };
        let christoffel = (0..n)
            .map(|k| (0..n).map(|i| (0..n).map(|j| geo.gamma(k, i, j).value()).collect()).collect())
            .collect();
        let ricci = geo.ricci()?;
        Ok(MetricPointData {
            g: val(&geo.g),
            g_inv: val(&geo.ginv),
            sqrt_det: geo.sqrt_det.value(),
            christoffel,
            ricci: Some(val(&ricci)),
        })
    }

    /// Checks symmetric positive definiteness at each sample and invariance of
    /// the metric under every period shift.
    pub fn validate_metric(&self, samples: &[Vec<f64>]) -> Result<()> {
        let n = self.dim();
        for p in samples {
            let g = self.metric_values(p)?;
            if !is_spd(&g, n) {
                return Err(Error::NotSpd { point: p.clone() });
            }
            for (k, c) in self.coords.iter().enumerate() {
                if let Some(period) = c.period {
                    let mut q = p.clone();
                    q[k] += period;
                    let shifted = self.metric_values(&q)?;
                    let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                    if g.iter().zip(&shifted).any(|(a, b)| (a - b).abs() > 1e-10 * scale) {
                        return Err(Error::InvalidChart(format!(
                            "metric not invariant under the period of {:?} at {p:?}",
                            c.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn metric_values(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.metric.iter().map(|e| Ok(e.value(p)?)).collect()
    }

    pub fn gradient(&self, u: &ScalarField, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        let geo = self.local(point, 1)?;
        let uj = u.jet(point, 1)?;
        Ok(gradient(&geo, &uj)?.iter().map(Jet::value).collect())
    }

    pub fn laplace_beltrami(&self, u: &ScalarField, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        let geo = self.local(point, 2)?;
        Ok(laplace_beltrami(&geo, &u.jet(point, 2)?)?.value())
    }

    /// Covariant Hessian `∂_i∂_j u - Γ^k_ij ∂_k u`, row-major.
    pub fn hessian(&self, u: &ScalarField, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(point)?;
        let geo = self.local(point, 1)?;
        let h = hessian(&geo, &u.jet(point, 2)?)?;
        let n = self.dim();
        Ok((0..n).map(|i| (0..n).map(|j| h[i * n + j].value()).collect()).collect())
    }

    pub fn bochner_residual(&self, u: &ScalarField, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        let geo = self.local(point, 3)?;
        bochner_residual(&geo, &u.jet(point, 3)?)
    }
}

fn is_spd(g: &[f64], n: usize) -> bool {
    let m = DMatrix::from_row_slice(n, n, g);
    m.cholesky().is_some()
}

/// Pointwise metric data.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPointData {
    pub g: Vec<Vec<f64>>,
    pub g_inv: Vec<Vec<f64>>,
    pub sqrt_det: f64,
    /// `christoffel[k][i][j] = Γ^k_ij`.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub ricci: Option<Vec<Vec<f64>>>,
}

/// Metric quantities expanded as jets about a point.
#[derive(Debug, Clone)]
pub struct LocalMetric {
    n: usize,
    order: usize,
    point: Vec<f64>,
    g: Vec<Jet>,
    ginv: Vec<Jet>,
    sqrt_det: Jet,
    /// `Γ^k_ij` at index `(k*n + i)*n + j`, one order below the metric.
    christoffel: Option<Vec<Jet>>,
}

impl LocalMetric {
    pub fn new(chart: &Chart, point: &[f64], order: usize) -> Result<Self> {
        let n = chart.dim();
        if point.len() != n {
            return Err(Error::ChartMismatch(format!("point has {} coordinates, chart has {n}", point.len())));
        }
        let g = chart.metric.iter().map(|e| e.jet(point, order)).collect::<Result<Vec<_>, _>>()?;
        let values: Vec<f64> = g.iter().map(Jet::value).collect();
        if !is_spd(&values, n) {
            return Err(Error::NotSpd { point: point.to_vec() });
        }
        let (ginv, det) = invert(&g, n)?;
        let sqrt_det = det.sqrt()?;
        let christoffel = if order >= 1 {
            let dg: Vec<Vec<Jet>> = g
                .iter()
                .map(|e| (0..n).map(|l| e.diff(l)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?;
            // dg[a*n+b][l] = ∂_l g_ab
            let mut gam = Vec::with_capacity(n * n * n);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = Jet::zero(n, order - 1);
                        for l in 0..n {
                            let t = &(&dg[j * n + l][i] + &dg[i * n + l][j]) - &dg[i * n + j][l];
                            acc += &ginv[k * n + l] * &t;
                        }
                        gam.push(acc.scale(0.5));
                    }
                }
            }
            Some(gam)
        } else {
            None
        };
        Ok(LocalMetric { n, order, point: point.to_vec(), g, ginv, sqrt_det, christoffel })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn g(&self, i: usize, j: usize) -> &Jet {
        &self.g[i * self.n + j]
    }

    pub fn ginv(&self, i: usize, j: usize) -> &Jet {
        &self.ginv[i * self.n + j]
    }

    pub fn sqrt_det(&self) -> &Jet {
        &self.sqrt_det
    }

    /// `Γ^k_ij`. Panics for an order-0 expansion, which carries no connection.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        let n = self.n;
        &self.christoffel.as_ref().expect("connection needs a metric jet of order >= 1")[(k * n + i) * n + j]
    }

    pub fn has_connection(&self) -> bool {
        self.christoffel.is_some()
    }

    /// Ricci tensor `Ric_bd`, two orders below the metric.
    pub fn ricci(&self) -> Result<Vec<Jet>> {
        let n = self.n;
        if self.order < 2 {
            return Err(Error::Jet(crate::jet::JetError::OrderExhausted));
        }
        let ord = self.order - 2;
        let mut ric = Vec::with_capacity(n * n);
        for b in 0..n {
            for d in 0..n {
                let mut acc = Jet::zero(n, ord);
                for a in 0..n {
                    acc += &self.gamma(a, d, b).diff(a)?;
                    acc -= &self.gamma(a, a, b).diff(d)?;
                    for e in 0..n {
                        acc += &(self.gamma(a, a, e) * self.gamma(e, d, b));
                        acc -= &(self.gamma(a, d, e) * self.gamma(e, a, b));
                    }
                }
                ric.push(acc);
            }
        }
        Ok(ric)
    }
}

// Gauss-Jordan over the jet ring; pivots are the (positive) leading minors ratios of an SPD matrix.
fn invert(a: &[Jet], n: usize) -> Result<(Vec<Jet>, Jet)> {
    let order = a[0].order();
    let mut m: Vec<Jet> = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n).map(|k| Jet::constant(n, order, if k / n == k % n { 1.0 } else { 0.0 })).collect();
    let mut det = Jet::constant(n, order, 1.0);
    for c in 0..n {
        let pivot = m[c * n + c].clone();
        det = &det * &pivot;
        let rp = pivot.recip()?;
        for j in 0..n {
            m[c * n + j] = &m[c * n + j] * &rp;
            inv[c * n + j] = &inv[c * n + j] * &rp;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = m[r * n + c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let dm = &f * &m[c * n + j];
                m[r * n + j] -= &dm;
                let di = &f * &inv[c * n + j];
                inv[r * n + j] -= &di;
            }
        }
    }
    Ok((inv, det))
}

/// `(∇u)^i = g^{ij} ∂_j u`.
pub fn gradient(geo: &LocalMetric, u: &Jet) -> Result<Vec<Jet>> {
    let n = geo.dim();
    let du = (0..n).map(|j| u.diff(j)).collect::<Result<Vec<_>, _>>()?;
    Ok((0..n)
        .map(|i| {
            let mut acc = Jet::zero(n, du[0].order().min(geo.order()));
            for (j, d) in du.iter().enumerate() {
                acc += &(geo.ginv(i, j) * d);
            }
            acc
        })
        .collect())
}

/// `|∇u|² = g^{ij} ∂_i u ∂_j u`.
pub fn grad_norm_sq(geo: &LocalMetric, u: &Jet) -> Result<Jet> {
    let n = geo.dim();
    let grad = gradient(geo, u)?;
    let mut acc = Jet::zero(n, grad[0].order());
    for (i, gi) in grad.iter().enumerate() {
        acc += &(gi * &u.diff(i)?);
    }
    Ok(acc)
}

/// `Δ⁰u = -(√g)⁻¹ ∂_i(√g g^{ij} ∂_j u)`, two orders below `u`.
pub fn laplace_beltrami(geo: &LocalMetric, u: &Jet) -> Result<Jet> {
    let n = geo.dim();
    let grad = gradient(geo, u)?;
    let mut div = Jet::zero(n, grad[0].order().saturating_sub(1));
    for (i, gi) in grad.iter().enumerate() {
        div += &(geo.sqrt_det() * gi).diff(i)?;
    }
    Ok(-(div.div(geo.sqrt_det())?))
}

/// Covariant Hessian `∂_i∂_j u - Γ^k_ij ∂_k u`, row-major, two orders below `u`.
pub fn hessian(geo: &LocalMetric, u: &Jet) -> Result<Vec<Jet>> {
    let n = geo.dim();
    let du = (0..n).map(|j| u.diff(j)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut h = du[j].diff(i)?;
            for (k, dk) in du.iter().enumerate() {
                h -= &(geo.gamma(k, i, j) * dk);
            }
            out.push(h);
        }
    }
    Ok(out)
}

/// `|Hess u|² = g^{ia} g^{jb} H_ij H_ab`.
pub fn hessian_norm_sq(geo: &LocalMetric, hess: &[Jet]) -> Jet {
    let n = geo.dim();
    // raise both indices once, then contract
    let mut raised = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Jet::zero(n, hess[0].order().min(geo.order()));
            for i in 0..n {
                for j in 0..n {
                    acc += &(&(geo.ginv(a, i) * geo.ginv(b, j)) * &hess[i * n + j]);
                }
            }
            raised.push(acc);
        }
    }
    let mut out = Jet::zero(n, raised[0].order());
    for (r, h) in raised.iter().zip(hess) {
        out += &(r * h);
    }
    out
}

/// Bilinear form `T(X, Y)` for a row-major covariant 2-tensor.
pub fn contract2(t: &[Jet], x: &[Jet], y: &[Jet]) -> Jet {
    let n = x.len();
    let mut acc = Jet::zero(n, t[0].order().min(x[0].order()).min(y[0].order()));
    for i in 0..n {
        for j in 0..n {
            acc += &(&t[i * n + j] * &(&x[i] * &y[j]));
        }
    }
    acc
}

/// `g(X, Y)` for vector jets.
pub fn metric_dot(geo: &LocalMetric, x: &[Jet], y: &[Jet]) -> Jet {
    contract2(&geo.g, x, y)
}

/// Returns `-Δ⁰(½|∇u|²) - (|Hess u|² - ⟨∇u, ∇Δ⁰u⟩ + Ric(∇u, ∇u))`.
pub fn bochner_residual(geo: &LocalMetric, u: &Jet) -> Result<f64> {
    let half_sq = grad_norm_sq(geo, u)?.scale(0.5);
    let lhs = -laplace_beltrami(geo, &half_sq)?;
    let hess = hessian(geo, u)?;
    let hess_sq = hessian_norm_sq(geo, &hess);
    let lap_u = laplace_beltrami(geo, u)?;
    let grad_u = gradient(geo, u)?;
    let grad_lap = gradient(geo, &lap_u)?;
    let cross = metric_dot(geo, &grad_u, &grad_lap);
    let ric = geo.ricci()?;
    let ric_term = contract2(&ric, &grad_u, &grad_u);
    Ok(lhs.value() - (hess_sq.value() - cross.value() + ric_term.value()))
}

/// Smallest eigenvalue of `Ric` relative to `g` (i.e. of `g^{-1/2} Ric g^{-1/2}`).
pub fn ricci_min_eigenvalue(data: &MetricPointData) -> Option<f64> {
    let ric = data.ricci.as_ref()?;
    let n = data.g.len();
    let g = DMatrix::from_fn(n, n, |i, j| data.g[i][j]);
    let r = DMatrix::from_fn(n, n, |i, j| ric[i][j]);
    let l = g.cholesky()?.l();
    let linv = l.try_inverse()?;
    let m = &linv * r * linv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.iter().cloned().reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flat_plane_has_no_connection_or_curvature() {
        let chart = Chart::euclidean(&["x", "y"]);
        let d = chart.metric_at(&[0.3, -1.2]).unwrap();
        assert!(d.christoffel.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!(d.ricci.unwrap().iter().flatten().all(|&v| v.abs() < 1e-9));
        assert_eq!(d.sqrt_det, 1.0);
    }

    #[test]
    fn volume_preserving_torus_metric() {
        let coords = vec![
            Coordinate::unbounded("s"),
            Coordinate::periodic("x1", 0.0, 1.0),
            Coordinate::periodic("x2", 0.0, 1.0),
        ];
        let chart =
            Chart::from_strings(coords, &[vec!["1", "0", "0"], vec!["0", "exp(s)", "0"], vec!["0", "0", "exp(-s)"]])
                .unwrap();
        let d = chart.metric_at(&[0.0, 0.2, 0.4]).unwrap();
        assert!(close(d.sqrt_det, 1.0, 1e-15));
        let d = chart.metric_at(&[1.7, 0.2, 0.4]).unwrap();
        assert!(close(d.sqrt_det, 1.0, 1e-14));
        // Ric_ss = -1/2 for this warped product, other entries vanish
        let ric = d.ricci.unwrap();
        assert!(close(ric[0][0], -0.5, 1e-12));
        assert!(close(ric[1][1], 0.0, 1e-12) && close(ric[2][2], 0.0, 1e-12));
    }

    #[test]
    fn sphere_christoffel_and_ricci() {
        let coords = vec![Coordinate::interval("th", 0.01, 3.13), Coordinate::periodic("ph", 0.0, std::f64::consts::TAU)];
        let chart = Chart::from_strings(coords, &[vec!["1", "0"], vec!["0", "sin(th)^2"]]).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let d = chart.metric_at(&[half_pi, 0.0]).unwrap();
        assert!(close(d.christoffel[0][1][1], 0.0, 1e-15));
        let th = 0.7;
        let d = chart.metric_at(&[th, 0.0]).unwrap();
        assert!(close(d.christoffel[0][1][1], -th.sin() * th.cos(), 1e-14));
        assert!(close(d.christoffel[1][0][1], th.cos() / th.sin(), 1e-14));
        // unit sphere: Ric = g
        let ric = d.ricci.unwrap();
        assert!(close(ric[0][0], 1.0, 1e-12));
        assert!(close(ric[1][1], th.sin().powi(2), 1e-12));
        assert!(close(ricci_min_eigenvalue(&chart.metric_at(&[th, 0.0]).unwrap()).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn inverse_metric_times_metric() {
        let chart = Chart::from_strings(
            vec![Coordinate::unbounded("x"), Coordinate::unbounded("y")],
            &[vec!["2 + sin(x)", "0.3*x*y"], vec!["0.3*x*y", "1 + y^2"]],
        )
        .unwrap();
        let d = chart.metric_at(&[0.4, -0.8]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|k| d.g[i][k] * d.g_inv[k][j]).sum();
                assert!(close(s, if i == j { 1.0 } else { 0.0 }, 1e-12));
            }
        }
        for k in 0..2 {
            assert!(close(d.christoffel[k][0][1], d.christoffel[k][1][0], 1e-15));
        }
    }

    #[test]
    fn scalar_operator_examples() {
        let line = Chart::euclidean(&["x"]);
        let u = line.scalar("x").unwrap();
        assert_eq!(line.gradient(&u, &[0.5]).unwrap(), vec![1.0]);
        let sq = line.scalar("x^2").unwrap();
        assert_eq!(line.laplace_beltrami(&sq, &[1.3]).unwrap(), -2.0);
        assert_eq!(line.hessian(&sq, &[1.3]).unwrap(), vec![vec![2.0]]);

        let plane = Chart::euclidean(&["x", "y"]);
        let hg = plane.scalar("-(x^2 + y^2)/2").unwrap();
        let g = plane.gradient(&hg, &[1.0, 1.0]).unwrap();
        assert_eq!(g[0] * g[0] + g[1] * g[1], 2.0);
        assert_eq!(plane.laplace_beltrami(&hg, &[0.2, 0.9]).unwrap(), 2.0);

        let r3 = Chart::euclidean(&["a", "b", "c"]);
        let hx = r3.scalar("-(3/2)*a^2").unwrap();
        assert_eq!(r3.laplace_beltrami(&hx, &[0.1, 2.0, -4.0]).unwrap(), 3.0);
    }

    #[test]
    fn constant_has_zero_bochner_residual() {
        let chart = Chart::from_strings(vec![Coordinate::unbounded("x")], &[vec!["1 + x^2"]]).unwrap();
        let u = chart.scalar("5").unwrap();
        assert_eq!(chart.bochner_residual(&u, &[0.3]).unwrap(), 0.0);
    }

    #[test]
    fn non_spd_metric_rejected() {
        let chart = Chart::from_strings(vec![Coordinate::unbounded("x")], &[vec!["x"]]).unwrap();
        assert!(matches!(chart.metric_at(&[-1.0]), Err(Error::NotSpd { .. })));
        assert!(chart.validate_metric(&[vec![1.0], vec![-0.5]]).is_err());
    }

    #[test]
    fn periodicity_checked() {
        let chart = Chart::from_strings(vec![Coordinate::periodic("t", 0.0, 1.0)], &[vec!["2 + sin(t)"]]).unwrap();
        assert!(chart.validate_metric(&[vec![0.3]]).is_err());
        let chart =
            Chart::from_strings(vec![Coordinate::periodic("t", 0.0, 1.0)], &[vec!["2 + sin(2*pi*t)"]]).unwrap();
        assert!(chart.validate_metric(&[vec![0.3]]).is_ok());
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let r = Chart::from_strings(
            vec![Coordinate::unbounded("x"), Coordinate::unbounded("y")],
            &[vec!["1", "x"], vec!["y", "1"]],
        );
        assert!(matches!(r, Err(Error::InvalidChart(_))));
    }
}
