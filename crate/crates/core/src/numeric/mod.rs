//! Quadrature-based checks of the Hilbert-space statements, finite-difference
//! spectra and the heat-kernel demonstration.

pub mod heat;
pub mod quadrature;
pub mod spectrum;

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::excited::Ladder;
use crate::expr::{BinOp, Expr, Func, ScalarField};
use crate::forms::{self, FormField, FormJet};
use crate::sampling::{random_polynomial, trial_rng};
use crate::weighted::{WeightSpec, WeightedPoint};

pub use quadrature::{AxisRule, QuadratureGrid};
pub use spectrum::{fd_spectrum, SpectrumResult, SpectrumSpec};

/// `Σ_k w_k (a, b)_{x_k}` where the pair of forms is produced per node.
/// The grid weights carry `√det g` and, for weighted grids, `e^{2h}`.
pub fn inner_product_mu<F>(grid: &QuadratureGrid, chart: &Chart, pair: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<(FormJet, FormJet)> + Sync,
{
    check_dim(grid, chart)?;
    grid.integrate(|p| {
        let (a, b) = pair(p)?;
        let geo = chart.local(p, 0)?;
        Ok(forms::inner(&geo, &a.truncate(0), &b.truncate(0)).value())
    })
}

fn check_dim(grid: &QuadratureGrid, chart: &Chart) -> Result<()> {
    if grid.axes.len() != chart.dim() {
        return Err(Error::ChartMismatch(format!("grid over {} axes, chart has {}", grid.axes.len(), chart.dim())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramResult {
    pub matrix: Vec<Vec<f64>>,
    /// `max_{i≠j} |G_ij| / sqrt(G_ii G_jj)`.
    pub max_off_ratio: f64,
    /// `max_k |G_kk / (k! α^k G_00) - 1|`.
    pub norm_law_error: f64,
}

/// Gram matrix of the excited states `φ_0..φ_kmax` in `L²_μ`.
pub fn gram_matrix(grid: &QuadratureGrid, w: &WeightSpec, kmax: usize) -> Result<GramResult> {
    let states = Ladder::new(w.alpha, w.gamma).states(kmax);
    // per node: values of every φ_k, then pairwise inner products
    let per_node = grid
        .points
        .par_iter()
        .zip(grid.weights.par_iter())
        .map(|(p, wt)| {
            let wp = WeightedPoint::with_order(&w.chart, &w.h, p, 1)?;
            let geo = w.chart.local(p, 0)?;
            let vals: Vec<FormJet> = states.iter().map(|s| s.to_form(&wp).truncate(0)).collect();
            let mut g = vec![0.0; (kmax + 1) * (kmax + 1)];
            for i in 0..=kmax {
                for j in i..=kmax {
                    let v = wt * forms::inner(&geo, &vals[i], &vals[j]).value();
                    g[i * (kmax + 1) + j] = v;
                    g[j * (kmax + 1) + i] = v;
                }
            }
            Ok(g)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut flat = vec![0.0; (kmax + 1) * (kmax + 1)];
    for g in &per_node {
        for (a, b) in flat.iter_mut().zip(g) {
            *a += b;
        }
    }
    let matrix: Vec<Vec<f64>> = flat.chunks(kmax + 1).map(|r| r.to_vec()).collect();
    let mut max_off_ratio = 0.0f64;
    let mut norm_law_error = 0.0f64;
    let mut factorial = 1.0;
    for i in 0..=kmax {
        if i > 0 {
            factorial *= i as f64;
        }
        let expected = factorial * w.alpha.powi(i as i32) * matrix[0][0];
        norm_law_error = norm_law_error.max((matrix[i][i] / expected - 1.0).abs());
        for j in 0..=kmax {
            if i != j {
                max_off_ratio = max_off_ratio.max(matrix[i][j].abs() / (matrix[i][i] * matrix[j][j]).sqrt());
            }
        }
    }
    Ok(GramResult { matrix, max_off_ratio, norm_law_error })
}

pub fn write_gram_csv(g: &GramResult, out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["k", "i", "value"])?;
    for (k, row) in g.matrix.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            wtr.write_record([k.to_string(), i.to_string(), format!("{v:e}")])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moment {
    pub j: usize,
    pub radius: f64,
    pub value: f64,
    /// `|M_j(2R) - M_j(R)|`: the mass gained by doubling the truncation.
    pub tail_estimate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub moments: Vec<Moment>,
    /// True when every moment settled under doubling of the radius.
    pub finite: bool,
}

/// Truncated moments `∫ |h|^j e^{2h} dvol` for `j <= jmax` at radius `R` and
/// `2R`. Node counts scale with the radius so the resolution stays fixed.
pub fn moment_estimate(
    w: &WeightSpec,
    jmax: usize,
    radius: f64,
    nodes: usize,
    periodic_nodes: usize,
    tolerance: f64,
) -> Result<MomentEstimate> {
    let mut moments = Vec::new();
    let near = QuadratureGrid::with_counts(&w.chart, Some(&w.h), nodes, periodic_nodes, radius)?;
    let far = QuadratureGrid::with_counts(&w.chart, Some(&w.h), 2 * nodes, periodic_nodes, 2.0 * radius)?;
    for j in 0..=jmax {
        let f = |p: &[f64]| Ok(w.h.value(p)?.abs().powi(j as i32));
        let a = near.integrate(f)?;
        let b = far.integrate(f)?;
        let tail = (b - a).abs();
        let converged = tail.is_finite() && tail <= tolerance * b.abs().max(1.0);
        moments.push(Moment { j, radius, value: a, tail_estimate: tail, converged });
        moments.push(Moment { j, radius: 2.0 * radius, value: b, tail_estimate: tail, converged });
    }
    let finite = moments.iter().all(|m| m.converged);
    Ok(MomentEstimate { moments, finite })
}

pub fn write_moments_csv(m: &MomentEstimate, out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["j", "radius", "value", "tail_estimate"])?;
    for r in &m.moments {
        wtr.write_record([r.j.to_string(), r.radius.to_string(), format!("{:e}", r.value), format!("{:e}", r.tail_estimate)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Largest relative residual of `‖h^j dh‖²_μ = ∫ (2γh^{2j} - 2αh^{2j+1}) e^{2h}`
/// over `j <= jmax`.
pub fn power_norm_consistency(grid: &QuadratureGrid, w: &WeightSpec, jmax: usize) -> Result<f64> {
    check_dim(grid, &w.chart)?;
    // per node: lhs_j then rhs_j for every j
    let sums = grid.integrate_many(2 * (jmax + 1), |p| {
        let wp = WeightedPoint::with_order(&w.chart, &w.h, p, 1)?;
        let geo = w.chart.local(p, 0)?;
        let h = w.h.value(p)?;
        let mut out = Vec::with_capacity(2 * (jmax + 1));
        for j in 0..=jmax {
            let f = wp.power_dh(j as u32).truncate(0);
            out.push(forms::inner(&geo, &f, &f).value());
        }
        for j in 0..=jmax {
            out.push(2.0 * w.gamma * h.powi(2 * j as i32) - 2.0 * w.alpha * h.powi(2 * j as i32 + 1));
        }
        Ok(out)
    })?;
    let (lhs, rhs) = sums.split_at(jmax + 1);
    Ok(lhs.iter().zip(rhs).map(|(l, r)| (l - r).abs() / r.abs().max(1.0)).fold(0.0, f64::max))
}

/// Localised random form: a polynomial in every slot times a Gaussian bump in
/// open directions and `exp(cos(x - c))` in periodic ones (rescaled to the period).
pub fn random_bump_form(rng: &mut impl Rng, chart: &Chart, width: f64, spread: f64) -> FormField {
    let n = chart.dim();
    let mut envelope: Option<Expr> = None;
    for (i, c) in chart.coords().iter().enumerate() {
        let x = Expr::var(i, c.name.clone());
        let factor = match c.period {
            Some(p) => {
                let centre = c.lo + rng.gen_range(0.0..p);
                let arg = Expr::bin(BinOp::Mul, Expr::float(std::f64::consts::TAU / p), Expr::bin(BinOp::Sub, x, Expr::float(centre)));
                Expr::call(Func::Exp, Expr::call(Func::Cos, arg))
            }
            None => {
                let centre = rng.gen_range(-spread..=spread).clamp(c.lo + width, c.hi - width);
                let d = Expr::bin(BinOp::Sub, x, Expr::float(centre));
                let q = Expr::bin(BinOp::Div, Expr::bin(BinOp::Pow, d, Expr::int(2)), Expr::float(width * width));
                Expr::call(Func::Exp, q.neg())
            }
        };
        envelope = Some(match envelope {
            Some(e) => Expr::bin(BinOp::Mul, e, factor),
            None => factor,
        });
    }
    let envelope = envelope.expect("charts have at least one coordinate");
    let mut terms = Vec::new();
    for mask in 0usize..1 << n {
        let idx = forms::indices_of(mask);
        let poly = rename(random_polynomial(rng, n, 2), chart);
        terms.push((idx, ScalarField::new(Expr::bin(BinOp::Mul, poly, envelope.clone()), n)));
    }
    FormField::from_terms(n, terms).expect("indices fit the chart")
}

/// Gives sampled polynomials the chart's coordinate names; a periodic
/// coordinate `x` with period `p` becomes `cos(2πx/p)` so the result is periodic.
fn rename(e: Expr, chart: &Chart) -> Expr {
    match e {
        Expr::Var { index, .. } => {
            let c = &chart.coords()[index];
            let x = Expr::var(index, c.name.clone());
            match c.period {
                Some(p) => Expr::call(Func::Cos, Expr::bin(BinOp::Mul, Expr::float(std::f64::consts::TAU / p), x)),
                None => x,
            }
        }
        Expr::Neg(a) => rename(*a, chart).neg(),
        Expr::Call(f, a) => Expr::call(f, rename(*a, chart)),
        Expr::Binary(op, a, b) => Expr::bin(op, rename(*a, chart), rename(*b, chart)),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointnessResult {
    pub trials: usize,
    /// `max |⟨Aω,ν⟩_μ - ⟨ω,A†ν⟩_μ| / max(1, |⟨Aω,ν⟩_μ|)`.
    pub ladder: f64,
    /// Same for `⟨D_μ ω, ν⟩_μ - ⟨ω, D_μ ν⟩_μ`.
    pub weighted_dirac: f64,
}

/// Adjointness of `A`/`A†` and symmetry of `D_μ` on random bump forms.
pub fn adjointness(w: &WeightSpec, grid: &QuadratureGrid, seed: u64, trials: usize) -> Result<AdjointnessResult> {
    check_dim(grid, &w.chart)?;
    let mut ladder = 0.0f64;
    let mut dirac = 0.0f64;
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, t);
        let om = random_bump_form(&mut rng, &w.chart, 0.8, 1.5);
        let nu = random_bump_form(&mut rng, &w.chart, 0.8, 1.5);
        let [a1, a2, d1, d2]: [f64; 4] = grid
            .integrate_many(4, |p| {
                let wp = WeightedPoint::with_order(&w.chart, &w.h, p, 1)?;
                let o = om.jet(p, 1)?;
                let v = nu.jet(p, 1)?;
                let geo = w.chart.local(p, 0)?;
                let ip = |a: &FormJet, b: &FormJet| forms::inner(&geo, &a.truncate(0), &b.truncate(0)).value();
                Ok(vec![
                    ip(&wp.a(&o)?, &v),
                    ip(&o, &wp.a_dagger(&v)?),
                    ip(&wp.d_mu(&o)?, &v),
                    ip(&o, &wp.d_mu(&v)?),
                ])
            })?
            .try_into()
            .expect("four integrals");
        ladder = ladder.max((a1 - a2).abs() / a1.abs().max(1.0));
        dirac = dirac.max((d1 - d2).abs() / d1.abs().max(1.0));
    }
    Ok(AdjointnessResult { trials, ladder, weighted_dirac: dirac })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetVolumes {
    pub values: Vec<f64>,
    pub volumes: Vec<f64>,
    /// `max - min` of the volumes.
    pub variation: f64,
}

/// `(n-1)`-volume of `r⁻¹(v)` for each `v`, for `r` depending on the first
/// coordinate only: the level set is a union of slices `{x_0 = u}` carrying the
/// metric minor of the remaining coordinates. Open directions are truncated at `radius`.
pub fn level_set_volume(chart: &Chart, r: &ScalarField, values: &[f64], radius: f64, nodes: usize) -> Result<LevelSetVolumes> {
    let n = chart.dim();
    if (1..n).any(|i| r.expr().depends_on(i)) {
        return Err(Error::Precondition("level sets need r to depend on the first coordinate only".into()));
    }
    let (lo, hi) = chart.coords()[0].truncated(radius);
    let rest: Vec<AxisRule> = chart.coords()[1..]
        .iter()
        .map(|c| match c.period {
            Some(p) => AxisRule::trapezoid(c.lo, p, nodes),
            None => {
                let (a, b) = c.truncated(radius);
                AxisRule::gauss(a, b, nodes)
            }
        })
        .collect();
    let mut volumes = Vec::with_capacity(values.len());
    for &v in values {
        let roots = roots_along(|u| Ok(r.value(&point_with(u, n))? - v), lo, hi, 4096)?;
        let mut total = 0.0;
        for u in roots {
            total += slice_volume(chart, u, &rest)?;
        }
        volumes.push(total);
    }
    let max = volumes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = volumes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LevelSetVolumes { values: values.to_vec(), volumes, variation: max - min })
}

fn point_with(u: f64, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[0] = u;
    p
}

/// Sign changes of `f` on a uniform scan, refined by bisection.
fn roots_along(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, scan: usize) -> Result<Vec<f64>> {
    // an irrational offset keeps scan nodes off symmetric roots
    let step = (hi - lo) / scan as f64;
    let start = lo + step * (std::f64::consts::SQRT_2 - 1.0);
    let mut roots = Vec::new();
    let mut a = start;
    let mut fa = f(a)?;
    while a + step <= hi {
        let b = a + step;
        let fb = f(b)?;
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut x, mut y, mut fx) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (x + y);
                if m <= x || m >= y {
                    break;
                }
                let fm = f(m)?;
                if fm == 0.0 {
                    x = m;
                    y = m;
                    break;
                }
                if (fm < 0.0) == (fx < 0.0) {
                    x = m;
                    fx = fm;
                } else {
                    y = m;
                }
            }
            roots.push(0.5 * (x + y));
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

fn slice_volume(chart: &Chart, u: f64, rest: &[AxisRule]) -> Result<f64> {
    let n = chart.dim();
    if n == 1 {
        return Ok(1.0);
    }
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(vec![u], 1.0)];
    for ax in rest {
        pts = pts
            .into_iter()
            .flat_map(|(p, w)| {
                ax.nodes.iter().zip(&ax.weights).map(move |(x, v)| {
                    let mut q = p.clone();
                    q.push(*x);
                    (q, w * v)
                })
            })
            .collect();
    }
    let m = n - 1;
    let mut total = 0.0;
    for (p, wt) in pts {
        let mut minor = nalgebra::DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                minor[(i, j)] = chart.metric_entry(i + 1, j + 1).value(&p)?;
            }
        }
        let det = minor.determinant();
        if !(det > 0.0) {
            return Err(Error::NotSpd { point: p });
        }
        total += wt * det.sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Coordinate;

    fn gaussian_line() -> WeightSpec {
        let chart = Chart::euclidean(&["x"]);
        let h = chart.scalar("-(1/2)*x^2").unwrap();
        WeightSpec::new(chart, h, 1.0, 0.0).unwrap()
    }

    #[test]
    fn hermite_norms_on_line() {
        let w = gaussian_line();
        let grid = QuadratureGrid::new(&w.chart, Some(&w.h), 200, 12.0).unwrap();
        let g = gram_matrix(&grid, &w, 6).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert!((g.matrix[0][0] - sp).abs() < 1e-12);
        assert!((g.matrix[1][1] - sp).abs() < 1e-12);
        assert!((g.matrix[2][2] - 2.0 * sp).abs() < 1e-12);
        assert!(g.matrix[0][2].abs() < 1e-10);
        assert!(g.max_off_ratio < 1e-8 && g.norm_law_error < 1e-7, "{g:?}");
    }

    #[test]
    fn moments_settle_for_gaussian_and_grow_for_flat_direction() {
        let w = gaussian_line();
        let m = moment_estimate(&w, 3, 12.0, 200, 16, 1e-10).unwrap();
        assert!(m.finite, "{m:?}");
        let chart = Chart::euclidean(&["x1", "x2"]);
        let h = chart.scalar("-(1/2)*x1^2").unwrap();
        let w = WeightSpec::new(chart, h, 1.0, 0.0).unwrap();
        let m = moment_estimate(&w, 1, 12.0, 100, 16, 1e-10).unwrap();
        assert!(!m.finite);
        // mass is linear in the flat direction
        assert!((m.moments[1].value / m.moments[0].value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn power_norms_match_scalar_integrals() {
        let w = gaussian_line();
        let grid = QuadratureGrid::new(&w.chart, Some(&w.h), 200, 12.0).unwrap();
        assert!(power_norm_consistency(&grid, &w, 3).unwrap() < 1e-8);
    }

    #[test]
    fn ladder_pair_adjoint_on_bumps() {
        let w = gaussian_line();
        let grid = QuadratureGrid::new(&w.chart, Some(&w.h), 200, 12.0).unwrap();
        let r = adjointness(&w, &grid, 7, 3).unwrap();
        assert!(r.ladder < 1e-7 && r.weighted_dirac < 1e-7, "{r:?}");
    }

    #[test]
    fn level_sets_of_volume_preserving_metric() {
        let coords = vec![
            Coordinate::unbounded("s"),
            Coordinate::periodic("x1", 0.0, std::f64::consts::TAU),
            Coordinate::periodic("x2", 0.0, std::f64::consts::TAU),
        ];
        let chart = Chart::from_strings(coords, &[vec!["1", "0", "0"], vec!["0", "exp(s)", "0"], vec!["0", "0", "exp(-s)"]]).unwrap();
        let r = chart.scalar("sqrt(s^2)").unwrap();
        let v = level_set_volume(&chart, &r, &[0.5, 1.0, 2.0], 10.0, 8).unwrap();
        let torus = 2.0 * (2.0 * std::f64::consts::PI).powi(2);
        for vol in &v.volumes {
            assert!((vol - torus).abs() < 1e-9, "{v:?}");
        }
    }
}
