//! Tensor-product quadrature over a chart's (truncated) domain.

use rayon::prelude::*;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarField;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m > 0);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_m
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// One-dimensional rule used in each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub periodic: bool,
    pub interval: (f64, f64),
}

impl AxisRule {
    pub fn gauss(lo: f64, hi: f64, m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        AxisRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
            periodic: false,
            interval: (lo, hi),
        }
    }

    pub fn trapezoid(lo: f64, period: f64, m: usize) -> Self {
        let step = period / m as f64;
        AxisRule {
            nodes: (0..m).map(|k| lo + step * k as f64).collect(),
            weights: vec![step; m],
            periodic: true,
            interval: (lo, lo + period),
        }
    }
}

/// Tensor-product nodes with weights `w_k · density(x_k)`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub axes: Vec<AxisRule>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Gauss–Legendre (truncated at `radius` where unbounded) or trapezoid per
    /// direction, weights multiplied by `√det g` and, when given, by `e^{2h}`.
    pub fn new(chart: &Chart, h: Option<&ScalarField>, nodes: usize, radius: f64) -> Result<Self> {
        QuadratureGrid::with_counts(chart, h, nodes, nodes, radius)
    }

    /// As [`QuadratureGrid::new`] with separate node counts for open and periodic directions.
    pub fn with_counts(
        chart: &Chart,
        h: Option<&ScalarField>,
        nodes: usize,
        periodic_nodes: usize,
        radius: f64,
    ) -> Result<Self> {
        let axes: Vec<AxisRule> = chart
            .coords()
            .iter()
            .map(|c| match c.period {
                Some(p) => AxisRule::trapezoid(c.lo, p, periodic_nodes),
                None => {
                    let (lo, hi) = c.truncated(radius);
                    AxisRule::gauss(lo, hi, nodes)
                }
            })
            .collect();
        QuadratureGrid::from_axes(chart, h, axes)
    }

    pub fn from_axes(chart: &Chart, h: Option<&ScalarField>, axes: Vec<AxisRule>) -> Result<Self> {
        if axes.len() != chart.dim() {
            return Err(Error::ChartMismatch(format!("{} axes for a {}-dimensional chart", axes.len(), chart.dim())));
        }
        let mut points: Vec<Vec<f64>> = vec![vec![]];
        let mut base: Vec<f64> = vec![1.0];
        for ax in &axes {
            let mut np = Vec::with_capacity(points.len() * ax.nodes.len());
            let mut nw = Vec::with_capacity(points.len() * ax.nodes.len());
            for (p, w) in points.iter().zip(&base) {
                for (x, v) in ax.nodes.iter().zip(&ax.weights) {
                    let mut q = p.clone();
                    q.push(*x);
                    np.push(q);
                    nw.push(w * v);
                }
            }
            points = np;
            base = nw;
        }
        let weights = points
            .par_iter()
            .zip(base.par_iter())
            .map(|(p, w)| {
                let geo = chart.local(p, 0)?;
                let mut v = w * geo.sqrt_det().value();
                if let Some(h) = h {
                    v *= (2.0 * h.value(p)?).exp();
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(QuadratureGrid { axes, points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ w_k f(x_k)`, evaluated in parallel.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let vals = self
            .points
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(p, w)| Ok(w * f(p)?))
            .collect::<Result<Vec<f64>>>()?;
        // fixed summation order keeps results reproducible
        Ok(vals.iter().sum())
    }
    /// Several integrals in one pass; `f` returns `count` values per node.
    pub fn integrate_many<F>(&self, count: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        let vals = self
            .points
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(p, w)| Ok(f(p)?.into_iter().map(|v| w * v).collect()))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let mut out = vec![0.0; count];
        for v in &vals {
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 9 is the limit for 5 nodes
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i - 2.0 / 9.0).abs() < 1e-14);
        assert!(w.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn gaussian_mass_on_line() {
        let chart = Chart::euclidean(&["x"]);
        let h = chart.scalar("-(1/2)*x^2").unwrap();
        let g = QuadratureGrid::new(&chart, Some(&h), 200, 12.0).unwrap();
        let m = g.integrate(|_| Ok(1.0)).unwrap();
        assert!((m - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_on_circle() {
        let chart = Chart::from_strings(
            vec![crate::chart::Coordinate::periodic("t", 0.0, std::f64::consts::TAU)],
            &[vec!["1"]],
        )
        .unwrap();
        let g = QuadratureGrid::new(&chart, None, 32, 0.0).unwrap();
        let i = g.integrate(|p| Ok(p[0].cos().powi(2))).unwrap();
        assert!((i - std::f64::consts::PI).abs() < 1e-13);
    }
}
