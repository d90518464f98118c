//! Heat kernels on the line and the circle under `∂ρ/∂t = ½ ∂²ρ/∂x²`
//! (variance `t`), and the behaviour of `h_t = t log ρ(t, x, 0)`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::expr::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatKind {
    Line,
    Circle,
}

impl HeatKind {
    pub fn name(self) -> &'static str {
        match self {
            HeatKind::Line => "line",
            HeatKind::Circle => "circle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatRow {
    pub kind: HeatKind,
    pub t: f64,
    pub x: f64,
    /// `h_t(x) + ½ d(0, x)²`.
    pub varadhan_residual: f64,
    /// `h_t + ½|∇h_t|² - t(∂_t h_t + ½Δ⁰h_t)`, with `Δ⁰ = -∂²_x`.
    pub identity_residual: f64,
    /// `∂²_x log ρ`.
    pub log_second_derivative: f64,
}

/// `h_t` on the line as an expression in `(t, x)`.
pub fn line_field() -> ScalarField {
    ScalarField::parse("t*(-(1/2)*log(2*pi*t) - x^2/(2*t))", &["t", "x"]).expect("fixed expression parses")
}

/// Image sum `Σ_k (2πt)^{-1/2} exp(-(x + Lk)²/(2t))` and its first two `x`
/// derivatives, on a circle of circumference `L`.
pub fn circle_kernel(t: f64, x: f64, length: f64) -> (f64, f64, f64) {
    let images = 8 + (6.0 * t.sqrt() / length).ceil() as i64;
    let norm = (2.0 * PI * t).powf(-0.5);
    let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
    for k in -images..=images {
        let y = x + length * k as f64;
        let g = norm * (-y * y / (2.0 * t)).exp();
        r0 += g;
        r1 += -y / t * g;
        r2 += (y * y / (t * t) - 1.0 / t) * g;
    }
    (r0, r1, r2)
}

fn circle_distance(x: f64, length: f64) -> f64 {
    let y = x.rem_euclid(length);
    y.min(length - y)
}

pub fn heat_demo(kind: HeatKind, ts: &[f64], xs: &[f64]) -> Result<Vec<HeatRow>> {
    let mut rows = Vec::with_capacity(ts.len() * xs.len());
    let line = line_field();
    let length = 2.0 * PI;
    for &t in ts {
        for &x in xs {
            let row = match kind {
                HeatKind::Line => {
                    let j = line.jet(&[t, x], 2)?;
                    let h = j.value();
                    let h_t = j.partial(&[0]).expect("order 2");
                    let h_x = j.partial(&[1]).expect("order 2");
                    let h_xx = j.partial(&[1, 1]).expect("order 2");
                    HeatRow {
                        kind,
                        t,
                        x,
                        varadhan_residual: h + 0.5 * x * x,
                        identity_residual: h + 0.5 * h_x * h_x - t * (h_t - 0.5 * h_xx),
                        log_second_derivative: h_xx / t,
                    }
                }
                HeatKind::Circle => {
                    let (r0, r1, r2) = circle_kernel(t, x, length);
                    let log_r = r0.ln();
                    let l1 = r1 / r0;
                    let l2 = r2 / r0 - l1 * l1;
                    let h = t * log_r;
                    let h_x = t * l1;
                    // ∂_t ρ = ½ρ''
                    let h_t = log_r + t * 0.5 * r2 / r0;
                    let lap = -t * l2;
                    let d = circle_distance(x, length);
                    HeatRow {
                        kind,
                        t,
                        x,
                        varadhan_residual: h + 0.5 * d * d,
                        identity_residual: h + 0.5 * h_x * h_x - t * (h_t + 0.5 * lap),
                        log_second_derivative: l2,
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `max - min` of `∂²_x log ρ` per time, for the rows of one kind.
pub fn log_second_derivative_spread(rows: &[HeatRow], t: f64) -> f64 {
    let vals: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.log_second_derivative).collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn write_heat_csv(rows: &[HeatRow], out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["kind", "t", "x", "varadhan_residual", "identity_residual", "log_second_derivative"])?;
    for r in rows {
        wtr.write_record([
            r.kind.name().to_string(),
            r.t.to_string(),
            r.x.to_string(),
            format!("{:e}", r.varadhan_residual),
            format!("{:e}", r.identity_residual),
            format!("{:e}", r.log_second_derivative),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_residuals_have_closed_forms() {
        let rows = heat_demo(HeatKind::Line, &[0.1, 0.01], &[-1.5, 0.0, 0.7]).unwrap();
        for r in rows {
            let expected = -(r.t / 2.0) * (2.0 * PI * r.t).ln();
            assert!((r.varadhan_residual - expected).abs() < 1e-12);
            assert!(r.identity_residual.abs() < 1e-10);
            assert!((r.log_second_derivative + 1.0 / r.t).abs() < 1e-9);
        }
    }

    #[test]
    fn circle_kernel_integrates_to_one() {
        let m = 256;
        let s: f64 = (0..m).map(|k| circle_kernel(0.5, 2.0 * PI * k as f64 / m as f64, 2.0 * PI).0).sum::<f64>() * 2.0 * PI / m as f64;
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_log_curvature_varies() {
        let xs: Vec<f64> = (0..16).map(|k| 2.0 * PI * k as f64 / 16.0).collect();
        let rows = heat_demo(HeatKind::Circle, &[0.5], &xs).unwrap();
        assert!(log_second_derivative_spread(&rows, 0.5) > 0.01);
        for r in &rows {
            assert!(r.identity_residual.abs() < 1e-10, "{r:?}");
        }
    }
}
