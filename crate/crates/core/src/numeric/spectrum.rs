//! Finite-difference spectra of `½Δ⁰ + V` on functions.
//!
//! The discretisation starts from the quadratic form
//! `½∫ ρ g^{ii} (∂_i u)² + ∫ V u² ρ` with `ρ = √det g` on a uniform grid
//! (Dirichlet at the truncation radius, wrap-around in periodic directions) and
//! is symmetrised by the diagonal mass matrix, so every spectrum is real.
//! Periodic directions that the data does not depend on are split off exactly
//! by discrete Fourier modes, leaving one tridiagonal problem per mode.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::weighted::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    /// Interior nodes along the unbounded direction.
    pub grid: usize,
    /// Nodes per periodic direction.
    pub periodic_nodes: usize,
    pub radius: f64,
    pub count: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { grid: 2000, periodic_nodes: 32, radius: 10.0, count: 5 }
    }
}

/// Largest total node count handed to the dense solver.
pub const DENSE_LIMIT: usize = 2500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Lowest eigenvalues over all sectors, ascending.
    pub eigenvalues: Vec<f64>,
    /// Nearest value of the reference set for each eigenvalue.
    pub targets: Vec<f64>,
    /// Lowest eigenvalues of the mode-zero sector (the whole problem when no
    /// periodic direction is split off), to be compared with `αk`.
    pub zero_mode: Vec<f64>,
    /// `|zero_mode[k] - αk|`.
    pub zero_mode_errors: Vec<f64>,
    pub method: String,
    pub grid: usize,
    pub spacing: f64,
    pub radius: f64,
}

impl SpectrumResult {
    pub fn max_zero_mode_error(&self) -> f64 {
        self.zero_mode_errors.iter().fold(0.0, |m, e| m.max(*e))
    }

    /// Largest deviation of consecutive zero-mode gaps from `alpha`.
    pub fn max_gap_error(&self, alpha: f64) -> f64 {
        self.zero_mode.windows(2).fold(0.0, |m, w| m.max((w[1] - w[0] - alpha).abs()))
    }
}

/// Eigenvalues `< x` of the symmetric tridiagonal matrix `(d, e)`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of a symmetric tridiagonal matrix, by bisection.
pub fn tridiagonal_lowest(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (0..count.min(n))
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(d, e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn is_zero_entry(chart: &Chart, i: usize, j: usize) -> bool {
    chart.metric_entry(i, j).expr().exact_value().is_some_and(|v| v == num_rational::BigRational::from_integer(0.into()))
}

fn depends_on_any(f: &ScalarField, axes: &[usize]) -> bool {
    axes.iter().any(|&a| f.expr().depends_on(a))
}

/// Spectrum of `½Δ⁰ + V` with `V = γ - αh - α/2` on a diagonal-metric chart
/// with at most one non-periodic direction (or a small dense problem otherwise).
pub fn fd_spectrum(w: &WeightSpec, spec: &SpectrumSpec) -> Result<SpectrumResult> {
    let chart = &w.chart;
    let n = chart.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j && !is_zero_entry(chart, i, j) {
                return Err(Error::Precondition("finite-difference spectra need a diagonal metric".into()));
            }
        }
    }
    let v = w.potential();
    let open: Vec<usize> = (0..n).filter(|&i| chart.coords()[i].period.is_none()).collect();
    let periodic: Vec<usize> = (0..n).filter(|&i| chart.coords()[i].period.is_some()).collect();
    let separable = open.len() == 1
        && !depends_on_any(&v, &periodic)
        && (0..n).all(|i| !depends_on_any(chart.metric_entry(i, i), &periodic));
    if separable {
        block_spectrum(w, &v, open[0], &periodic, spec)
    } else {
        dense_spectrum(w, &v, spec)
    }
}

struct Axis {
    index: usize,
    lo: f64,
    step: f64,
    nodes: usize,
    periodic: bool,
}

impl Axis {
    fn node(&self, j: usize) -> f64 {
        if self.periodic {
            self.lo + self.step * j as f64
        } else {
            self.lo + self.step * (j + 1) as f64
        }
    }
}

fn axis_for(chart: &Chart, i: usize, open_nodes: usize, periodic_nodes: usize, radius: f64) -> Result<Axis> {
    let c = &chart.coords()[i];
    match c.period {
        Some(p) => Ok(Axis { index: i, lo: c.lo, step: p / periodic_nodes as f64, nodes: periodic_nodes, periodic: true }),
        None => {
            let (lo, hi) = c.truncated(radius);
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Precondition(format!("cannot truncate {:?} at radius {radius}", c.name)));
            }
            Ok(Axis { index: i, lo, step: (hi - lo) / (open_nodes + 1) as f64, nodes: open_nodes, periodic: false })
        }
    }
}

fn rho_and_inverse(chart: &Chart, p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let geo = chart.local(p, 0)?;
    let n = chart.dim();
    Ok((geo.sqrt_det().value(), (0..n).map(|i| geo.ginv(i, i).value()).collect()))
}

fn block_spectrum(
    w: &WeightSpec,
    v: &ScalarField,
    open: usize,
    periodic: &[usize],
    spec: &SpectrumSpec,
) -> Result<SpectrumResult> {
    let chart = &w.chart;
    let n = chart.dim();
    let ax = axis_for(chart, open, spec.grid, spec.periodic_nodes, spec.radius)?;
    let pax: Vec<Axis> = periodic
        .iter()
        .map(|&i| axis_for(chart, i, spec.grid, spec.periodic_nodes, spec.radius))
        .collect::<Result<_>>()?;
    let base: Vec<f64> = (0..n).map(|i| chart.coords()[i].period.map_or(0.0, |_| chart.coords()[i].lo)).collect();
    let at = |x: f64| {
        let mut p = base.clone();
        p[open] = x;
        p
    };
    let m = ax.nodes;
    let dx = ax.step;
    let mut rho = Vec::with_capacity(m);
    let mut pot = Vec::with_capacity(m);
    let mut ginv_p = Vec::with_capacity(m);
    for j in 0..m {
        let p = at(ax.node(j));
        let (r, gi) = rho_and_inverse(chart, &p)?;
        rho.push(r);
        pot.push(v.value(&p)?);
        ginv_p.push(periodic.iter().map(|&k| gi[k]).collect::<Vec<f64>>());
    }
    // fluxes at midpoints x_{j-1/2}, j = 0..=m
    let flux = (0..=m)
        .map(|j| {
            let x = ax.lo + dx * (j as f64 + 0.5);
            let (r, gi) = rho_and_inverse(chart, &at(x))?;
            Ok(r * gi[open])
        })
        .collect::<Result<Vec<f64>>>()?;

    let sector = |lams: &[f64], count: usize| -> Vec<f64> {
        let mut d = Vec::with_capacity(m);
        let mut e = Vec::with_capacity(m.saturating_sub(1));
        for j in 0..m {
            let modal: f64 = ginv_p[j].iter().zip(lams).map(|(g, l)| 0.5 * g * l).sum();
            let k = 0.5 * (flux[j] + flux[j + 1]) / dx + dx * rho[j] * (modal + pot[j]);
            d.push(k / (dx * rho[j]));
            if j + 1 < m {
                e.push(-0.5 * flux[j + 1] / (dx * dx * (rho[j] * rho[j + 1]).sqrt()));
            }
        }
        tridiagonal_lowest(&d, &e, count)
    };

    let zero_mode = sector(&vec![0.0; pax.len()], spec.count);
    let mut all = zero_mode.clone();
    // signed modes up to count per direction; higher modes only raise the spectrum
    let mmax: Vec<i64> = pax.iter().map(|a| (a.nodes as i64 / 2).min(spec.count as i64 + 1)).collect();
    let mut modes: Vec<Vec<i64>> = vec![vec![]];
    for &mm in &mmax {
        modes = modes.into_iter().flat_map(|pre| (-mm..=mm).map(move |k| [pre.clone(), vec![k]].concat())).collect();
    }
    let offsets_known = periodic.iter().all(|&i| chart.metric_entry(i, i).expr().is_constant());
    let mut targets_set: Vec<f64> = Vec::new();
    for mode in &modes {
        let lams: Vec<f64> = mode
            .iter()
            .zip(&pax)
            .map(|(&k, a)| (2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / a.nodes as f64).cos()) / (a.step * a.step))
            .collect();
        if offsets_known {
            let off: f64 = mode
                .iter()
                .zip(&pax)
                .map(|(&k, a)| {
                    let period = a.step * a.nodes as f64;
                    let gi = 1.0 / chart.metric_entry(a.index, a.index).value(&base).unwrap_or(f64::NAN);
                    0.5 * gi * (2.0 * std::f64::consts::PI * k as f64 / period).powi(2)
                })
                .sum();
            targets_set.extend((0..=2 * spec.count).map(|k| w.alpha * k as f64 + off));
        }
        if mode.iter().all(|&k| k == 0) {
            continue;
        }
        all.extend(sector(&lams, spec.count));
    }
    if targets_set.is_empty() {
        targets_set = (0..=2 * spec.count).map(|k| w.alpha * k as f64).collect();
    }
    all.sort_by(f64::total_cmp);
    all.truncate(spec.count);
    Ok(finish(w, all, zero_mode, &targets_set, if pax.is_empty() { "tridiagonal" } else { "fourier-blocks" }, spec, dx))
}

fn finish(
    w: &WeightSpec,
    eigenvalues: Vec<f64>,
    zero_mode: Vec<f64>,
    targets_set: &[f64],
    method: &str,
    spec: &SpectrumSpec,
    spacing: f64,
) -> SpectrumResult {
    let targets = eigenvalues
        .iter()
        .map(|l| targets_set.iter().copied().min_by(|a, b| (a - l).abs().total_cmp(&(b - l).abs())).unwrap_or(f64::NAN))
        .collect();
    let zero_mode_errors = zero_mode.iter().enumerate().map(|(k, l)| (l - w.alpha * k as f64).abs()).collect();
    SpectrumResult {
        eigenvalues,
        targets,
        zero_mode,
        zero_mode_errors,
        method: method.to_string(),
        grid: spec.grid,
        spacing,
        radius: spec.radius,
    }
}

fn dense_spectrum(w: &WeightSpec, v: &ScalarField, spec: &SpectrumSpec) -> Result<SpectrumResult> {
    let chart = &w.chart;
    let n = chart.dim();
    // shrink the grid until the tensor product fits the dense solver
    let mut per = spec.grid.max(2);
    while per.pow(n as u32) > DENSE_LIMIT && per > 2 {
        per -= 1;
    }
    let axes: Vec<Axis> = (0..n).map(|i| axis_for(chart, i, per, per, spec.radius)).collect::<Result<_>>()?;
    let sizes: Vec<usize> = axes.iter().map(|a| a.nodes).collect();
    let total: usize = sizes.iter().product();
    let unflat = |mut k: usize| -> Vec<usize> {
        let mut idx = vec![0; n];
        for d in (0..n).rev() {
            idx[d] = k % sizes[d];
            k /= sizes[d];
        }
        idx
    };
    let flat = |idx: &[usize]| idx.iter().zip(&sizes).fold(0, |acc, (i, s)| acc * s + i);
    let cell: f64 = axes.iter().map(|a| a.step).product();
    let point = |idx: &[usize]| -> Vec<f64> { axes.iter().zip(idx).map(|(a, &j)| a.node(j)).collect() };
    let mut mass = vec![0.0; total];
    let mut k = DMatrix::<f64>::zeros(total, total);
    for row in 0..total {
        let idx = unflat(row);
        let p = point(&idx);
        let (r, _) = rho_and_inverse(chart, &p)?;
        mass[row] = cell * r;
        k[(row, row)] += cell * r * v.value(&p)?;
        for (d, a) in axes.iter().enumerate() {
            // edge to the next node in direction d, with flux at the midpoint
            let mut mid = p.clone();
            mid[d] += 0.5 * a.step;
            let (rm, gm) = rho_and_inverse(chart, &mid)?;
            let c = 0.5 * rm * gm[d] * cell / (a.step * a.step);
            let next = idx[d] + 1;
            let nbr = if next < a.nodes {
                Some(next)
            } else if a.periodic {
                Some(0)
            } else {
                None
            };
            k[(row, row)] += c;
            if let Some(nj) = nbr {
                let mut j2 = idx.clone();
                j2[d] = nj;
                let col = flat(&j2);
                k[(col, col)] += c;
                k[(row, col)] -= c;
                k[(col, row)] -= c;
            }
            if !a.periodic && idx[d] == 0 {
                // Dirichlet edge on the low side
                let mut lowmid = p.clone();
                lowmid[d] -= 0.5 * a.step;
                let (rl, gl) = rho_and_inverse(chart, &lowmid)?;
                k[(row, row)] += 0.5 * rl * gl[d] * cell / (a.step * a.step);
            }
        }
    }
    for i in 0..total {
        for j in 0..total {
            k[(i, j)] /= (mass[i] * mass[j]).sqrt();
        }
    }
    let sym = (&k - k.transpose()).abs().max();
    if sym > 1e-9 * k.abs().max().max(1.0) {
        return Err(Error::Numeric(format!("assembled operator not symmetric ({sym:e})")));
    }
    let eig = SymmetricEigen::try_new(k, 1e-14, 10_000).ok_or_else(|| Error::Numeric("dense eigensolver failed".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(spec.count);
    let targets: Vec<f64> = (0..=2 * spec.count).map(|k| w.alpha * k as f64).collect();
    let mut used = *spec;
    used.grid = per;
    Ok(finish(w, vals.clone(), vals, &targets, "dense", &used, axes[0].step))
}

/// Observed order `log(e1/e2) / log(Δ1/Δ2)` of the mode-zero error between two grids.
pub fn convergence_order(w: &WeightSpec, spec: &SpectrumSpec, coarse: usize, fine: usize) -> Result<(f64, f64, f64)> {
    let a = fd_spectrum(w, &SpectrumSpec { grid: coarse, ..*spec })?;
    let b = fd_spectrum(w, &SpectrumSpec { grid: fine, ..*spec })?;
    let (e1, e2) = (a.max_zero_mode_error(), b.max_zero_mode_error());
    Ok(((e1 / e2).ln() / (a.spacing / b.spacing).ln(), e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Coordinate;

    #[test]
    fn tridiagonal_bisection_matches_known_spectrum() {
        // second-difference matrix: 2 - 2cos(kπ/(n+1))
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let l = tridiagonal_lowest(&d, &e, 4);
        for (k, v) in l.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn oscillator_on_line() {
        let chart = Chart::euclidean(&["x"]);
        let h = chart.scalar("-(1/2)*x^2").unwrap();
        let w = WeightSpec::new(chart, h, 1.0, 0.0).unwrap();
        let r = fd_spectrum(&w, &SpectrumSpec { grid: 400, ..Default::default() }).unwrap();
        assert!(r.max_zero_mode_error() < 0.05, "{r:?}");
        assert_eq!(r.method, "tridiagonal");
    }

    #[test]
    fn dense_and_block_agree_on_cylinder() {
        let coords = vec![Coordinate::unbounded("s"), Coordinate::periodic("t", 0.0, std::f64::consts::TAU)];
        let chart = Chart::from_strings(coords, &[vec!["1", "0"], vec!["0", "1"]]).unwrap();
        let h = chart.scalar("-(1/2)*s^2").unwrap();
        let w = WeightSpec::new(chart, h, 1.0, 0.0).unwrap();
        let spec = SpectrumSpec { grid: 40, periodic_nodes: 40, radius: 6.0, count: 6 };
        let block = fd_spectrum(&w, &spec).unwrap();
        let dense = dense_spectrum(&w, &w.potential(), &spec).unwrap();
        for (a, b) in block.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{block:?} {dense:?}");
        }
    }
}
