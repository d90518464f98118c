//! Operators on forms weighted by `e^{2h} dx`.
//!
//! Notation: `c_h ω = dh ∧ ω - i_{∇h} ω` (Clifford multiplication by `∇h`),
//! `D = d + δ`, the annihilator `A = D/√2`, its weighted adjoint
//! `A† = (D + 2 c_h)/√2`, and the number operator `N = A†A`.

use crate::chart::{self, Chart, LocalMetric};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Func, ScalarField};
use crate::forms::{self, FormJet};
use crate::jet::Jet;

/// Jet order used for metric and weight at a point; enough for two stacked
/// first-order operators on top of second derivatives of `h`.
pub const POINT_ORDER: usize = 3;

/// Weight `h` with the constants of the ladder construction.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    pub chart: Chart,
    pub h: ScalarField,
    pub alpha: f64,
    pub gamma: f64,
}

impl WeightSpec {
    pub fn new(chart: Chart, h: ScalarField, alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Precondition(format!("gamma must be finite, got {gamma}")));
        }
        if h.nvars() != chart.dim() {
            return Err(Error::ChartMismatch(format!("weight over {} coordinates, chart has {}", h.nvars(), chart.dim())));
        }
        Ok(WeightSpec { chart, h, alpha, gamma })
    }

    pub fn at(&self, point: &[f64]) -> Result<WeightedPoint> {
        WeightedPoint::new(&self.chart, &self.h, point)
    }

    /// `V = γ - αh - α/2`, the potential of the conjugated operator when both
    /// weight conditions hold.
    pub fn potential(&self) -> ScalarField {
        let n = self.chart.dim();
        let lin = Expr::bin(BinOp::Mul, Expr::float(self.alpha), self.h.expr().clone());
        let e = Expr::bin(BinOp::Sub, Expr::float(self.gamma - self.alpha / 2.0), lin);
        ScalarField::new(e, n)
    }

    /// `|Hess h|² - (c1 + c2 h)` with `c1 = α² + 2cγ`, `c2 = -2cα` for a Ricci
    /// lower bound `Ric >= -c g`, together with the residual of the identity
    /// `|Hess h|² = α² - Ric(∇h, ∇h)`.
    pub fn hessian_bound(&self, c: f64, point: &[f64]) -> Result<HessianBound> {
        let p = self.at(point)?;
        let hess = chart::hessian(&p.geo, &p.h)?;
        let hess_sq = chart::hessian_norm_sq(&p.geo, &hess).value();
        let ric = p.geo.ricci()?;
        let ric_grad = chart::contract2(&ric, &p.grad_h, &p.grad_h).value();
        let c1 = self.alpha * self.alpha + 2.0 * c * self.gamma;
        let c2 = -2.0 * c * self.alpha;
        Ok(HessianBound {
            hess_sq,
            bound: c1 + c2 * p.h.value(),
            bound_residual: hess_sq - (c1 + c2 * p.h.value()),
            identity_residual: hess_sq - (self.alpha * self.alpha - ric_grad),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianBound {
    pub hess_sq: f64,
    pub bound: f64,
    /// `<= 0` when the bound holds.
    pub bound_residual: f64,
    pub identity_residual: f64,
}

/// Metric and weight expanded at one point, with the weighted operators.
#[derive(Debug, Clone)]
pub struct WeightedPoint {
    pub geo: LocalMetric,
    pub h: Jet,
    pub dh: FormJet,
    pub grad_h: Vec<Jet>,
}

impl WeightedPoint {
    pub fn new(chart: &Chart, h: &ScalarField, point: &[f64]) -> Result<Self> {
        WeightedPoint::with_order(chart, h, point, POINT_ORDER)
    }

    /// Expansion of lower order, for callers that need fewer derivatives.
    pub fn with_order(chart: &Chart, h: &ScalarField, point: &[f64], order: usize) -> Result<Self> {
        chart.check_point(point)?;
        let geo = chart.local(point, order)?;
        let hj = h.jet(point, order)?;
        WeightedPoint::from_parts(geo, hj)
    }

    pub fn from_parts(geo: LocalMetric, h: Jet) -> Result<Self> {
        let dh = forms::exterior_d(&FormJet::scalar(h.clone()))?;
        let grad_h = chart::gradient(&geo, &h)?;
        Ok(WeightedPoint { geo, h, dh, grad_h })
    }

    pub fn dim(&self) -> usize {
        self.geo.dim()
    }

    /// `|dh|²`.
    pub fn grad_sq(&self) -> Result<Jet> {
        chart::grad_norm_sq(&self.geo, &self.h)
    }

    /// `Δ⁰h`.
    pub fn laplace_h(&self) -> Result<Jet> {
        chart::laplace_beltrami(&self.geo, &self.h)
    }

    /// `c_h ω = dh ∧ ω - i_{∇h} ω`.
    pub fn clifford(&self, w: &FormJet) -> FormJet {
        &forms::wedge(&self.dh, w) - &forms::interior(&self.grad_h, w)
    }

    pub fn dirac(&self, w: &FormJet) -> Result<FormJet> {
        forms::dirac(&self.geo, w)
    }

    pub fn laplacian(&self, w: &FormJet) -> Result<FormJet> {
        forms::laplacian(&self.geo, w)
    }

    pub fn a(&self, w: &FormJet) -> Result<FormJet> {
        Ok(self.dirac(w)?.scale(std::f64::consts::FRAC_1_SQRT_2))
    }

    pub fn a_dagger(&self, w: &FormJet) -> Result<FormJet> {
        let t = &self.dirac(w)? + &self.clifford(w).scale(2.0);
        Ok(t.scale(std::f64::consts::FRAC_1_SQRT_2))
    }

    /// `N = ½Δ + c_h D`, the expanded form of `A†A`.
    pub fn number(&self, w: &FormJet) -> Result<FormJet> {
        let half_lap = self.laplacian(w)?.scale(0.5);
        Ok(&half_lap + &self.clifford(&self.dirac(w)?))
    }

    /// `A†Aω` by literal composition.
    pub fn number_composed(&self, w: &FormJet) -> Result<FormJet> {
        self.a_dagger(&self.a(w)?)
    }

    /// `∇_{∇h} ω`.
    pub fn nabla_grad_h(&self, w: &FormJet) -> Result<FormJet> {
        forms::covariant_derivative(&self.geo, &self.grad_h, w)
    }

    /// `AA†ω - A†Aω`, by literal double application.
    pub fn commutator(&self, w: &FormJet) -> Result<FormJet> {
        let ad = self.a(&self.a_dagger(w)?)?;
        let da = self.a_dagger(&self.a(w)?)?;
        Ok(&ad - &da)
    }

    /// Closed form of the commutator: `-2(c_h D ω + ∇_{∇h} ω) + (Δ⁰h) ω`.
    pub fn commutator_formula(&self, w: &FormJet) -> Result<FormJet> {
        let p = self.p_h_residual(w)?.scale(-2.0);
        Ok(&p + &w.mul_jet(&self.laplace_h()?))
    }

    pub fn commutator_residual(&self, w: &FormJet) -> Result<FormJet> {
        Ok(&self.commutator(w)? - &self.commutator_formula(w)?)
    }

    /// `(c_h D + ∇_{∇h}) ω`; vanishes exactly on the subspace where the
    /// commutator reduces to multiplication by `Δ⁰h`.
    pub fn p_h_residual(&self, w: &FormJet) -> Result<FormJet> {
        Ok(&self.clifford(&self.dirac(w)?) + &self.nabla_grad_h(w)?)
    }

    /// `H_h ω`.
    pub fn hessian_operator(&self, w: &FormJet) -> Result<FormJet> {
        forms::hessian_operator(&self.geo, &self.h, w)
    }

    /// `D_μ = d + δ - 2 i_{∇h}`, symmetric for the weighted pairing.
    pub fn d_mu(&self, w: &FormJet) -> Result<FormJet> {
        Ok(&self.dirac(w)? - &forms::interior(&self.grad_h, w).scale(2.0))
    }

    /// `Δ_μ = D_μ²`.
    pub fn laplacian_mu(&self, w: &FormJet) -> Result<FormJet> {
        self.d_mu(&self.d_mu(w)?)
    }

    /// `Δ - 2 L_{∇h}`, the expanded form of `Δ_μ`.
    pub fn laplacian_mu_expanded(&self, w: &FormJet) -> Result<FormJet> {
        let lie = forms::lie_derivative(&self.grad_h, w)?;
        Ok(&self.laplacian(w)? - &lie.scale(2.0))
    }

    /// `N̂ = ½Δ_μ + H_h`.
    pub fn number_hat(&self, w: &FormJet) -> Result<FormJet> {
        Ok(&self.laplacian_mu(w)?.scale(0.5) + &self.hessian_operator(w)?)
    }

    /// `e^h N̂ (e^{-h} ω)`.
    pub fn number_hat_conjugated(&self, w: &FormJet) -> Result<FormJet> {
        let down = w.mul_jet(&(-&self.h).exp());
        Ok(self.number_hat(&down)?.mul_jet(&self.h.exp()))
    }

    /// `½Δω + (½|dh|² - ½Δ⁰h) ω`, the Schrödinger form of the conjugated operator.
    pub fn schrodinger(&self, w: &FormJet) -> Result<FormJet> {
        let v = (&self.grad_sq()? - &self.laplace_h()?).scale(0.5);
        Ok(&self.laplacian(w)?.scale(0.5) + &w.mul_jet(&v))
    }

    /// `h^j`.
    pub fn power(&self, j: u32) -> Jet {
        (0..j).fold(Jet::constant(self.dim(), self.h.order(), 1.0), |acc, _| &acc * &self.h)
    }

    /// `h^j dh`.
    pub fn power_dh(&self, j: u32) -> FormJet {
        self.dh.mul_jet(&self.power(j))
    }
}

/// One residual statistic over sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionStat {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConditionStat {
    fn from_residuals(name: &str, residuals: &[f64], tolerance: f64) -> Self {
        let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64
        };
        ConditionStat {
            name: name.to_string(),
            max,
            mean,
            samples: residuals.len(),
            tolerance,
            pass: !residuals.is_empty() && max < tolerance && max.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub alpha: f64,
    pub gamma: f64,
    /// True when `alpha`, `gamma` were fitted from the first sample.
    pub fitted: bool,
    pub stats: Vec<ConditionStat>,
    /// Least-squares `½|∇h|² ≈ γ' - α' h` over the samples, as `(α', γ')`.
    pub energy_fit: Option<(f64, f64)>,
    /// Set when the Laplacian and energy conditions demand different `α`.
    pub incompatibility: Option<String>,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.stats.iter().all(|s| s.pass) && self.incompatibility.is_none()
    }

    pub fn stat(&self, name: &str) -> Option<&ConditionStat> {
        self.stats.iter().find(|s| s.name == name)
    }
}

pub const LAPLACIAN_CONDITION: &str = "weight-laplacian-constant";
pub const ENERGY_CONDITION: &str = "weight-energy-constant";
pub const HARMONIC_CONDITION: &str = "distance-harmonic";
pub const UNIT_GRADIENT_CONDITION: &str = "distance-unit-gradient";

/// Checks `Δ⁰h = α` and `αh + ½|∇h|² = γ` at the samples. Without given
/// constants, `α` is read off `Δ⁰h` and `γ` off `αh + ½|∇h|²` at the first sample.
pub fn check_conditions(
    chart: &Chart,
    h: &ScalarField,
    constants: Option<(f64, f64)>,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConditionReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("no sample points".into()));
    }
    let mut lap = Vec::with_capacity(samples.len());
    let mut half_sq = Vec::with_capacity(samples.len());
    let mut hv = Vec::with_capacity(samples.len());
    for p in samples {
        chart.check_point(p)?;
        let geo = chart.local(p, 2)?;
        let hj = h.jet(p, 2)?;
        lap.push(chart::laplace_beltrami(&geo, &hj)?.value());
        half_sq.push(0.5 * chart::grad_norm_sq(&geo, &hj)?.value());
        hv.push(hj.value());
    }
    let (alpha, gamma, fitted) = match constants {
        Some((a, g)) => (a, g, false),
        None => {
            let a = lap[0];
            (a, a * hv[0] + half_sq[0], true)
        }
    };
    let r1: Vec<f64> = lap.iter().map(|l| l - alpha).collect();
    let r2: Vec<f64> = hv.iter().zip(&half_sq).map(|(h, q)| alpha * h + q - gamma).collect();
    let stats = vec![
        ConditionStat::from_residuals(LAPLACIAN_CONDITION, &r1, tolerance),
        ConditionStat::from_residuals(ENERGY_CONDITION, &r2, tolerance),
    ];
    let energy_fit = linear_fit(&hv, &half_sq).map(|(intercept, slope)| (-slope, intercept));
    let incompatibility = energy_fit.and_then(|(a2, _)| {
        let a1 = lap[0];
        let lap_const = lap.iter().all(|l| (l - a1).abs() < tolerance);
        let scale = a1.abs().max(a2.abs()).max(1.0);
        (lap_const && (a1 - a2).abs() > 1e-6 * scale).then(|| {
            format!(
                "the Laplacian condition needs alpha = {} but the energy condition needs alpha = {}; \
                 no single alpha satisfies both",
                fmt_num(a1),
                fmt_num(a2)
            )
        })
    });
    Ok(ConditionReport { alpha, gamma, fitted, stats, energy_fit, incompatibility })
}

fn fmt_num(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        format!("{r}")
    } else {
        format!("{x:.6}")
    }
}

/// Least squares `y ≈ intercept + slope x`; `None` when `x` is (nearly) constant.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * n {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// `r = sqrt(-(2/α)(h - γ/α))`, the distance function attached to a weight.
pub fn h_to_r(h: &ScalarField, alpha: f64, gamma: f64) -> ScalarField {
    let shifted = Expr::bin(BinOp::Sub, h.expr().clone(), Expr::float(gamma / alpha));
    let scaled = Expr::bin(BinOp::Mul, Expr::float(-2.0 / alpha), shifted);
    ScalarField::new(Expr::call(Func::Sqrt, scaled), h.nvars())
}

/// `h = -(α/2) r² + γ/α`.
pub fn r_to_h(r: &ScalarField, alpha: f64, gamma: f64) -> ScalarField {
    let sq = Expr::bin(BinOp::Pow, r.expr().clone(), Expr::int(2));
    let e = Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::float(-alpha / 2.0), sq), Expr::float(gamma / alpha));
    ScalarField::new(e, r.nvars())
}

/// Checks `h <= γ/α` at the samples, which `h_to_r` requires.
pub fn check_r_defined(h: &ScalarField, alpha: f64, gamma: f64, samples: &[Vec<f64>]) -> Result<()> {
    let cap = gamma / alpha;
    for p in samples {
        let v = h.value(p)?;
        if v > cap + 1e-12 * cap.abs().max(1.0) {
            return Err(Error::Domain(format!("h = {v} exceeds gamma/alpha = {cap} at {p:?}")));
        }
    }
    Ok(())
}

/// Residuals of `Δ⁰r = 0` and `|∇r| = 1` at samples with `|r| > exclude`.
pub fn check_harmonic_distance(
    chart: &Chart,
    r: &ScalarField,
    samples: &[Vec<f64>],
    exclude: f64,
    tolerance: (f64, f64),
) -> Result<ConditionReport> {
    let mut harm = Vec::new();
    let mut unit = Vec::new();
    for p in samples {
        let rv = r.value(p)?;
        if rv.abs() <= exclude {
            continue;
        }
        let geo = chart.local(p, 2)?;
        let rj = r.jet(p, 2)?;
        harm.push(chart::laplace_beltrami(&geo, &rj)?.value());
        unit.push(chart::grad_norm_sq(&geo, &rj)?.value().sqrt() - 1.0);
    }
    Ok(ConditionReport {
        alpha: f64::NAN,
        gamma: f64::NAN,
        fitted: false,
        stats: vec![
            ConditionStat::from_residuals(HARMONIC_CONDITION, &harm, tolerance.0),
            ConditionStat::from_residuals(UNIT_GRADIENT_CONDITION, &unit, tolerance.1),
        ],
        energy_fit: None,
        incompatibility: None,
    })
}

/// Largest `c >= 0` with `Ric >= -c g` observed at the samples (a sampled estimate).
pub fn ricci_lower_bound(chart: &Chart, samples: &[Vec<f64>]) -> Result<f64> {
    let mut c = 0.0f64;
    for p in samples {
        let data = chart.metric_at(p)?;
        let m = chart::ricci_min_eigenvalue(&data).ok_or_else(|| Error::Numeric("Ricci eigenvalues".into()))?;
        c = c.max(-m);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Coordinate;

    fn line_gaussian() -> WeightSpec {
        let chart = Chart::euclidean(&["x"]);
        let h = chart.scalar("-(1/2)*x^2").unwrap();
        WeightSpec::new(chart, h, 1.0, 0.0).unwrap()
    }

    fn one(n: usize) -> FormJet {
        FormJet::scalar(Jet::constant(n, POINT_ORDER, 1.0))
    }

    #[test]
    fn creation_on_constant() {
        let w = line_gaussian();
        let p = w.at(&[0.7]).unwrap();
        let phi1 = p.a_dagger(&one(1)).unwrap();
        assert!((phi1.component(&[0]).value() - std::f64::consts::SQRT_2 * -0.7).abs() < 1e-15);
        assert_eq!(p.clifford(&one(1)), p.dh);
    }

    #[test]
    fn annihilation_examples() {
        let chart = Chart::euclidean(&["x"]);
        let p = WeightedPoint::new(&chart, &chart.scalar("0").unwrap(), &[0.4]).unwrap();
        let sq = FormJet::scalar(Jet::variable(1, 3, 0, 0.4).powi(2).unwrap());
        let a = p.a(&sq).unwrap();
        assert!((a.component(&[0]).value() - std::f64::consts::SQRT_2 * 0.4).abs() < 1e-15);
        // A(-√2 x dx) = 1 for the Gaussian weight
        let w = line_gaussian();
        let p = w.at(&[0.4]).unwrap();
        let phi1 = p.a_dagger(&one(1)).unwrap();
        assert!((p.a(&phi1).unwrap().coeff(0).value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn number_operator_on_hermite_states() {
        let w = line_gaussian();
        for &x in &[-1.3, 0.0, 0.45, 2.0] {
            let p = w.at(&[x]).unwrap();
            assert!(p.number(&one(1)).unwrap().is_zero());
            let xj = Jet::variable(1, 3, 0, x);
            let u = (&xj * &xj).scale(-2.0).add_scalar(1.0);
            let nu = p.number(&FormJet::scalar(u.clone())).unwrap();
            assert!((nu.coeff(0).value() - 2.0 * u.value()).abs() < 1e-12);
            let phi1 = p.a_dagger(&one(1)).unwrap();
            let r = &p.number(&phi1).unwrap() - &phi1;
            assert!(r.max_abs_value() < 1e-9);
            let r = &p.number_composed(&phi1).unwrap() - &phi1;
            assert!(r.max_abs_value() < 1e-9);
        }
    }

    #[test]
    fn commutator_examples() {
        let w = line_gaussian();
        let p = w.at(&[0.8]).unwrap();
        let c = p.commutator(&one(1)).unwrap();
        assert!((c.coeff(0).value() - p.laplace_h().unwrap().value()).abs() < 1e-13);
        let dx = FormJet::monomial(&[0], Jet::constant(1, 3, 1.0));
        let c = p.commutator(&dx).unwrap();
        assert!((c.component(&[0]).value() - 1.0).abs() < 1e-13);
        assert!(p.commutator_residual(&dx).unwrap().max_abs_value() < 1e-13);
    }

    #[test]
    fn p_h_members_and_oracles() {
        let chart = Chart::euclidean(&["x", "y"]);
        let h = chart.scalar("sin(x) + x*y^2").unwrap();
        let p = WeightedPoint::new(&chart, &h, &[0.3, -0.6]).unwrap();
        for j in 0..3 {
            assert!(p.p_h_residual(&FormJet::scalar(p.power(j))).unwrap().max_abs_value() < 1e-13);
        }
        // f = exp(h): residual dh ∧ df = 0 because df ∥ dh
        let f = p.h.exp();
        assert!(p.p_h_residual(&FormJet::scalar(f)).unwrap().max_abs_value() < 1e-13);
        // generic f: residual equals dh ∧ df
        let f = Jet::variable(2, 3, 0, 0.3);
        let r = p.p_h_residual(&FormJet::scalar(f.clone())).unwrap();
        let df = forms::exterior_d(&FormJet::scalar(f)).unwrap();
        assert!((&r - &forms::wedge(&p.dh, &df)).max_abs_value() < 1e-13);
        // h^j dh against ½h^j(2Δ⁰h dh + d|dh|²)
        for j in 0..3 {
            let r = p.p_h_residual(&p.power_dh(j)).unwrap();
            let oracle = (&p.dh.mul_jet(&p.laplace_h().unwrap()).scale(2.0)
                + &forms::exterior_d(&FormJet::scalar(p.grad_sq().unwrap())).unwrap())
                .mul_jet(&p.power(j))
                .scale(0.5);
            assert!((&r - &oracle).max_abs_value() < 1e-12, "j = {j}");
        }
    }

    #[test]
    fn conditions_on_examples() {
        let samples = crate::sampling::halton(&[(-3.0, 3.0), (-3.0, 3.0)], 200);
        let chart = Chart::euclidean(&["x1", "x2"]);
        let hx = chart.scalar("-(3/2)*x1^2").unwrap();
        let rep = check_conditions(&chart, &hx, Some((3.0, 0.0)), &samples, 1e-10).unwrap();
        assert!(rep.pass(), "{rep:?}");
        let hg = chart.scalar("-(x1^2 + x2^2)/2").unwrap();
        let rep = check_conditions(&chart, &hg, None, &samples, 1e-8).unwrap();
        assert!(!rep.pass());
        assert_eq!(rep.alpha, 2.0);
        let (a2, g2) = rep.energy_fit.unwrap();
        assert!((a2 - 1.0).abs() < 1e-12 && g2.abs() < 1e-12);
        assert!(rep.incompatibility.as_deref().unwrap().contains("alpha = 2"));
    }

    #[test]
    fn distance_round_trip_on_line() {
        let w = line_gaussian();
        let r = h_to_r(&w.h, 1.0, 0.0);
        for &x in &[-2.0, -0.3, 0.5, 1.7] {
            assert!((r.value(&[x]).unwrap() - f64::abs(x)).abs() < 1e-15);
        }
        let back = r_to_h(&r, 1.0, 0.0);
        for &x in &[-2.0, 0.0, 1.1] {
            assert!((back.value(&[x]).unwrap() - w.h.value(&[x]).unwrap()).abs() < 1e-12);
        }
        let samples: Vec<Vec<f64>> = (-20..=20).map(|k| vec![k as f64 * 0.1]).collect();
        let rep = check_harmonic_distance(&w.chart, &r, &samples, 0.1, (1e-7, 1e-9)).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert_eq!(rep.stats[0].samples, 38);
    }

    #[test]
    fn hessian_bound_flat_equality() {
        let w = line_gaussian();
        let b = w.hessian_bound(0.0, &[0.9]).unwrap();
        assert!((b.hess_sq - 1.0).abs() < 1e-14);
        assert!(b.bound_residual.abs() < 1e-14 && b.identity_residual.abs() < 1e-14);
    }

    #[test]
    fn potential_of_line_gaussian() {
        let v = line_gaussian().potential();
        assert!((v.value(&[2.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!((v.value(&[0.0]).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_alpha_rejected() {
        let chart = Chart::euclidean(&["x"]);
        let h = chart.scalar("x").unwrap();
        assert!(WeightSpec::new(chart, h, -1.0, 0.0).is_err());
    }

    #[test]
    fn warped_torus_weight() {
        let coords = vec![
            Coordinate::unbounded("s"),
            Coordinate::periodic("x1", 0.0, 1.0),
            Coordinate::periodic("x2", 0.0, 1.0),
        ];
        let chart =
            Chart::from_strings(coords, &[vec!["1", "0", "0"], vec!["0", "exp(s)", "0"], vec!["0", "0", "exp(-s)"]])
                .unwrap();
        let h = chart.scalar("-(1/2)*s^2").unwrap();
        let w = WeightSpec::new(chart, h, 1.0, 0.0).unwrap();
        let g = w.chart.gradient(&w.h, &[1.5, 0.2, 0.3]).unwrap();
        assert_eq!(g, vec![-1.5, 0.0, 0.0]);
        let b = w.hessian_bound(0.5, &[1.5, 0.2, 0.3]).unwrap();
        assert!(b.identity_residual.abs() < 1e-12);
        assert!(b.bound_residual.abs() < 1e-12);
        assert!((b.hess_sq - (1.0 + 1.5 * 1.5 / 2.0)).abs() < 1e-12);
    }
}
