//! Randomised identity suites: each trial draws a chart, point and fields from
//! its own seeded stream and records the residual of every identity.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{self, Chart};
use crate::error::Result;
use crate::forms::{self, FormJet, FramePointData};
use crate::sampling::{random_chart, random_form, random_point, random_scalar, trial_rng};
use crate::weighted::{WeightedPoint, POINT_ORDER};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityOutcome {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Collector {
    rows: Vec<(&'static str, f64)>,
}

impl Collector {
    fn push(&mut self, name: &'static str, r: f64) {
        self.rows.push((name, r));
    }

    fn form(&mut self, name: &'static str, r: &FormJet) {
        self.push(name, r.max_abs_value());
    }
}

fn summarise(per_trial: Vec<Vec<(&'static str, f64)>>, tolerance: f64) -> Vec<IdentityOutcome> {
    let mut names: Vec<&'static str> = Vec::new();
    for rows in &per_trial {
        for (n, _) in rows {
            if !names.contains(n) {
                names.push(n);
            }
        }
    }
    names
        .into_iter()
        .map(|name| {
            let vals: Vec<f64> = per_trial.iter().flatten().filter(|(n, _)| *n == name).map(|(_, v)| *v).collect();
            // NaN must fail, so fold with a comparison that keeps it
            let max = vals.iter().fold(0.0f64, |m, &v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) });
            IdentityOutcome {
                name: name.to_string(),
                trials: vals.len(),
                max_residual: max,
                tolerance,
                pass: max < tolerance,
            }
        })
        .collect()
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn appendix_trial(seed: u64, trial: u64) -> Result<Vec<(&'static str, f64)>> {
    let mut rng = trial_rng(seed, trial);
    let n = 1 + (trial as usize % 4);
    let chart = random_chart(&mut rng, n);
    let point = random_point(&mut rng, n);
    let p = rand::Rng::gen_range(&mut rng, 0..=n);
    let q = rand::Rng::gen_range(&mut rng, 0..=n);
    let all: Vec<usize> = (0..=n).collect();
    let f = random_scalar(&mut rng, n).jet(&point, POINT_ORDER)?;
    let w = random_form(&mut rng, n, &all).jet(&point, POINT_ORDER)?;
    let wp = random_form(&mut rng, n, &[p]).jet(&point, POINT_ORDER)?;
    let nu = random_form(&mut rng, n, &[q]).jet(&point, POINT_ORDER)?;
    let v = random_form(&mut rng, n, &all).jet(&point, POINT_ORDER)?;
    let geo = chart.local(&point, POINT_ORDER)?;
    let d = forms::exterior_d;
    let mut c = Collector::default();

    let df = d(&FormJet::scalar(f.clone()))?;
    let grad = chart::gradient(&geo, &f)?;
    let lap_f = chart::laplace_beltrami(&geo, &f)?;

    // d(ω∧ν) = dω∧ν + (-1)^p ω∧dν
    let lhs = d(&forms::wedge(&wp, &nu))?;
    let rhs = &forms::wedge(&d(&wp)?, &nu) + &forms::wedge(&wp, &d(&nu)?).scale(sign(p));
    c.form("wedge-leibniz", &(&lhs - &rhs));

    // δ(fω) = -i_{∇f}ω + fδω
    let lhs = forms::codifferential(&geo, &w.mul_jet(&f))?;
    let rhs = &forms::codifferential(&geo, &w)?.mul_jet(&f) - &forms::interior(&grad, &w);
    c.form("codifferential-product", &(&lhs - &rhs));

    // {i_{∇f}, df∧} = |df|²
    let anti = &forms::interior(&grad, &forms::wedge(&df, &w)) + &forms::wedge(&df, &forms::interior(&grad, &w));
    let df_sq = forms::inner(&geo, &df, &df);
    c.form("interior-wedge-anticommutator", &(&anti - &w.mul_jet(&df_sq)));
    c.push("gradient-norm", df_sq.value() - chart::metric_dot(&geo, &grad, &grad).value());

    // δ(df∧ω) = (Δ⁰f)ω + H_f ω - ∇_{∇f}ω - df∧δω
    let h_f = forms::hessian_operator(&geo, &f, &w)?;
    let nab = forms::covariant_derivative(&geo, &grad, &w)?;
    let lhs = forms::codifferential(&geo, &forms::wedge(&df, &w))?;
    let rhs = &(&(&w.mul_jet(&lap_f) + &h_f) - &nab) - &forms::wedge(&df, &forms::codifferential(&geo, &w)?);
    c.form("codifferential-of-wedge", &(&lhs - &rhs));

    // L_{∇f} = H_f + ∇_{∇f}, with L from Cartan's formula
    let cartan = forms::lie_derivative(&grad, &w)?;
    c.form("lie-hessian-split", &(&cartan - &(&h_f + &nab)));
    let split = forms::lie_derivative_gradient(&geo, &f, &w)?;
    c.form("lie-two-routes", &(&cartan - &split));

    // Δ(fω) = (Δ⁰f)ω - 2∇_{∇f}ω + fΔω
    let lhs = forms::laplacian(&geo, &w.mul_jet(&f))?;
    let rhs = &(&w.mul_jet(&lap_f) - &nab.scale(2.0)) + &forms::laplacian(&geo, &w)?.mul_jet(&f);
    c.form("laplacian-product", &(&lhs - &rhs));

    c.form("d-squared", &d(&d(&w)?)?);
    c.form("codifferential-squared", &forms::codifferential(&geo, &forms::codifferential(&geo, &w)?)?);
    c.form("codifferential-star", &(&forms::codifferential(&geo, &w)? - &forms::codifferential_star(&geo, &w)?));

    let star2 = forms::hodge_star(&geo, &forms::hodge_star(&geo, &wp));
    c.form("double-star", &(&star2 - &wp.scale(sign(p * (n - p)))));

    let dirac = forms::dirac(&geo, &forms::dirac(&geo, &w)?)?;
    c.form("dirac-square", &(&dirac - &forms::laplacian(&geo, &w)?));

    // ⟨df∧ω, ν⟩ = ⟨ω, i_{∇f}ν⟩
    let a = forms::inner(&geo, &forms::wedge(&df, &w), &v).value();
    let b = forms::inner(&geo, &w, &forms::interior(&grad, &v)).value();
    c.push("wedge-interior-adjoint", a - b);

    let frame = FramePointData::new(&geo)?;
    c.push("frame-orthonormal", frame.orthonormality_defect());
    let hess = chart::hessian(&geo, &f)?;
    let hess_v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| hess[i * n + j].value()).collect()).collect();
    let framed = frame.hessian_operator(&hess_v, &w);
    let worst = framed.iter().zip(h_f.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    c.push("hessian-operator-frame", worst);

    let trace: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| geo.ginv(i, j).value() * hess[i * n + j].value()).sum();
    c.push("hessian-trace", trace + lap_f.value());
    Ok(c.rows)
}

/// Exterior-calculus identities over random charts of dimension 1 to 4.
pub fn appendix_suite(seed: u64, trials: usize, tolerance: f64) -> Result<Vec<IdentityOutcome>> {
    let rows = (0..trials as u64).into_par_iter().map(|t| appendix_trial(seed, t)).collect::<Result<Vec<_>>>()?;
    Ok(summarise(rows, tolerance))
}

fn weighted_trial(seed: u64, trial: u64) -> Result<Vec<(&'static str, f64)>> {
    let mut rng = trial_rng(seed, trial);
    let n = 1 + (trial as usize % 3);
    let chart = random_chart(&mut rng, n);
    let point = random_point(&mut rng, n);
    let all: Vec<usize> = (0..=n).collect();
    let h = random_scalar(&mut rng, n);
    let w = random_form(&mut rng, n, &all).jet(&point, POINT_ORDER)?;
    let v = random_form(&mut rng, n, &all).jet(&point, POINT_ORDER)?;
    let p = WeightedPoint::new(&chart, &h, &point)?;
    let mut c = Collector::default();
    c.form("commutator-formula", &p.commutator_residual(&w)?);
    c.form("number-expanded", &(&p.number(&w)? - &p.number_composed(&w)?));
    let cc = p.clifford(&p.clifford(&w));
    c.form("clifford-square", &(&cc + &w.mul_jet(&p.grad_sq()?)));
    let skew = forms::inner(&p.geo, &p.clifford(&w), &v) + forms::inner(&p.geo, &w, &p.clifford(&v));
    c.push("clifford-skew", skew.value());
    c.form("weighted-laplacian", &(&p.laplacian_mu(&w)? - &p.laplacian_mu_expanded(&w)?));
    c.form("conjugated-number", &(&p.number_hat_conjugated(&w)? - &p.schrodinger(&w)?));
    let lap_h = p.laplace_h()?;
    for j in 0..3 {
        let hj = FormJet::scalar(p.power(j));
        c.form("commutator-on-powers", &(&p.commutator(&hj)? - &hj.mul_jet(&lap_h)));
    }
    Ok(c.rows)
}

/// Weighted-operator identities over random charts and weights of dimension 1 to 3.
pub fn weighted_suite(seed: u64, trials: usize, tolerance: f64) -> Result<Vec<IdentityOutcome>> {
    let rows = (0..trials as u64).into_par_iter().map(|t| weighted_trial(seed, t)).collect::<Result<Vec<_>>>()?;
    Ok(summarise(rows, tolerance))
}

fn bochner_trial(seed: u64, trial: u64) -> Result<Vec<(&'static str, f64)>> {
    let mut rng = trial_rng(seed, trial);
    let n = 1 + (trial as usize % 3);
    let chart: Chart = random_chart(&mut rng, n);
    let point = random_point(&mut rng, n);
    let u = random_scalar(&mut rng, n);
    Ok(vec![("bochner", chart.bochner_residual(&u, &point)?)])
}

/// Bochner formula residuals over random charts of dimension 1 to 3.
pub fn bochner_suite(seed: u64, trials: usize, tolerance: f64) -> Result<Vec<IdentityOutcome>> {
    let rows = (0..trials as u64).into_par_iter().map(|t| bochner_trial(seed, t)).collect::<Result<Vec<_>>>()?;
    Ok(summarise(rows, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for o in appendix_suite(1, 8, 1e-8).unwrap() {
            assert!(o.pass, "{o:?}");
        }
        for o in weighted_suite(1, 6, 1e-7).unwrap() {
            assert!(o.pass, "{o:?}");
        }
        for o in bochner_suite(1, 6, 1e-6).unwrap() {
            assert!(o.pass, "{o:?}");
        }
    }
}
