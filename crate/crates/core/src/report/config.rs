//! Scenario files: JSON with expression strings, checked and compiled before a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Coordinate};
use crate::error::{Error, Result};
use crate::expr::{parse, ScalarField};
use crate::weighted::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub chart: ChartConfig,
    pub weight: WeightConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Half-width of the sampling box in open directions.
    #[serde(default = "default_sample_radius")]
    pub sample_radius: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}
fn default_sample_radius() -> f64 {
    3.0
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub coords: Vec<CoordConfig>,
    /// Full metric matrix of expression strings; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

/// A constant given as a number or the word `"fit"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub h: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ConstantSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<ConstantSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutator: Option<CommutatorCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitiesCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excited_states: Option<ExcitedCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_sets: Option<LevelSetCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionsCheck {
    /// Also derive the distance function and check it.
    pub distance: bool,
    /// Samples with `|r|` at or below this are left out of the distance checks.
    pub distance_exclude: f64,
    pub hessian: bool,
}

impl Default for ConditionsCheck {
    fn default() -> Self {
        ConditionsCheck { distance: true, distance_exclude: 1e-6, hessian: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommutatorCheck {
    pub points: usize,
    pub max_power: u32,
}

impl Default for CommutatorCheck {
    fn default() -> Self {
        CommutatorCheck { points: 200, max_power: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesCheck {
    pub trials: usize,
    pub bochner_trials: usize,
}

impl Default for IdentitiesCheck {
    fn default() -> Self {
        IdentitiesCheck { trials: 200, bochner_trials: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcitedCheck {
    pub kmax: usize,
    /// Points for the pointwise `Nφ_k = αkφ_k` evaluation.
    pub points: usize,
}

impl Default for ExcitedCheck {
    fn default() -> Self {
        ExcitedCheck { kmax: 12, points: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GramCheck {
    pub kmax: usize,
    pub nodes: usize,
    pub periodic_nodes: usize,
    pub radius: f64,
    pub moments_jmax: usize,
    pub adjoint_trials: usize,
    pub adjoint_nodes: usize,
    pub adjoint_radius: f64,
}

impl Default for GramCheck {
    fn default() -> Self {
        GramCheck {
            kmax: 6,
            nodes: 200,
            periodic_nodes: 16,
            radius: 12.0,
            moments_jmax: 4,
            adjoint_trials: 3,
            adjoint_nodes: 120,
            adjoint_radius: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumCheck {
    pub grid: usize,
    pub periodic_nodes: usize,
    pub radius: f64,
    pub count: usize,
    /// Also solve at half the grid and report the observed order.
    pub convergence: bool,
}

impl Default for SpectrumCheck {
    fn default() -> Self {
        SpectrumCheck { grid: 2000, periodic_nodes: 32, radius: 10.0, count: 5, convergence: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatCheck {
    pub line_times: Vec<f64>,
    pub line_points: Vec<f64>,
    pub circle_times: Vec<f64>,
    pub circle_points: usize,
}

impl Default for HeatCheck {
    fn default() -> Self {
        HeatCheck {
            line_times: vec![0.1, 0.01, 0.001],
            line_points: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            circle_times: vec![0.5],
            circle_points: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelSetCheck {
    pub values: Vec<f64>,
    pub nodes: usize,
    pub radius: f64,
}

impl Default for LevelSetCheck {
    fn default() -> Self {
        LevelSetCheck { values: vec![0.5, 1.0, 2.0, 3.0], nodes: 16, radius: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub conditions: f64,
    pub harmonic: f64,
    pub unit_gradient: f64,
    pub round_trip: f64,
    pub hessian: f64,
    pub commutator: f64,
    pub identities: f64,
    pub bochner: f64,
    pub excited_pointwise: f64,
    pub gram_ratio: f64,
    pub norm_law: f64,
    pub power_norms: f64,
    pub moments: f64,
    pub adjoint: f64,
    pub spectrum: f64,
    pub spectrum_gap: f64,
    pub heat: f64,
    pub heat_varadhan: f64,
    pub level_sets: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            conditions: 1e-8,
            harmonic: 1e-7,
            unit_gradient: 1e-9,
            round_trip: 1e-12,
            hessian: 1e-8,
            commutator: 1e-7,
            identities: 1e-8,
            bochner: 1e-6,
            excited_pointwise: 1e-8,
            gram_ratio: 1e-8,
            norm_law: 1e-7,
            power_norms: 1e-8,
            moments: 1e-10,
            adjoint: 1e-7,
            spectrum: 2e-3,
            spectrum_gap: 5e-3,
            heat: 1e-10,
            heat_varadhan: 1e-12,
            level_sets: 1e-9,
        }
    }
}

/// A validated scenario with compiled chart and weight.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub chart: Chart,
    pub h: ScalarField,
    /// `None` means "fit from the first sample".
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

impl Scenario {
    /// Weight with the given or fitted constants.
    pub fn weight(&self, alpha: f64, gamma: f64) -> Result<WeightSpec> {
        WeightSpec::new(self.chart.clone(), self.h.clone(), alpha, gamma)
    }
}

fn config_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { pointer: pointer.into(), message: message.into() }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        config_err(pointer, e.into_inner().to_string())
    })
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

pub fn load_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    compile(parse_config(&text)?)
}

fn constant(spec: &Option<ConstantSpec>, pointer: &str) -> Result<Option<f64>> {
    match spec {
        None => Ok(None),
        Some(ConstantSpec::Word(w)) if w == "fit" => Ok(None),
        Some(ConstantSpec::Word(w)) => Err(config_err(pointer, format!("expected a number or \"fit\", got {w:?}"))),
        Some(ConstantSpec::Value(v)) if v.is_finite() => Ok(Some(*v)),
        Some(ConstantSpec::Value(v)) => Err(config_err(pointer, format!("constant must be finite, got {v}"))),
    }
}

/// Checks the schema-level invariants and compiles every expression.
pub fn compile(config: ScenarioConfig) -> Result<Scenario> {
    let cc = &config.chart;
    if cc.coords.is_empty() {
        return Err(config_err("/chart/coords", "at least one coordinate is required"));
    }
    let mut coords = Vec::with_capacity(cc.coords.len());
    for (i, c) in cc.coords.iter().enumerate() {
        let coord = match (c.period, c.lo, c.hi) {
            (Some(p), lo, None) => {
                if !(p > 0.0) || !p.is_finite() {
                    return Err(config_err(format!("/chart/coords/{i}/period"), "period must be positive"));
                }
                Coordinate::periodic(c.name.clone(), lo.unwrap_or(0.0), p)
            }
            (Some(_), _, Some(_)) => {
                return Err(config_err(format!("/chart/coords/{i}/hi"), "a periodic coordinate takes lo and period, not hi"))
            }
            (None, lo, hi) => {
                let lo = lo.unwrap_or(f64::NEG_INFINITY);
                let hi = hi.unwrap_or(f64::INFINITY);
                if !(lo < hi) {
                    return Err(config_err(format!("/chart/coords/{i}"), "need lo < hi"));
                }
                Coordinate::interval(c.name.clone(), lo, hi)
            }
        };
        coords.push(coord);
    }
    let names: Vec<String> = cc.coords.iter().map(|c| c.name.clone()).collect();
    let n = names.len();
    let metric = match &cc.metric {
        None => (0..n)
            .map(|i| (0..n).map(|j| parse(if i == j { "1" } else { "0" }, &names)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_err("/chart/metric", e.to_string()))?,
        Some(rows) => {
            if rows.len() != n {
                return Err(config_err("/chart/metric", format!("expected {n} rows, got {}", rows.len())));
            }
            let mut out = Vec::with_capacity(n);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(config_err(format!("/chart/metric/{i}"), format!("expected {n} entries, got {}", row.len())));
                }
                let mut r = Vec::with_capacity(n);
                for (j, text) in row.iter().enumerate() {
                    r.push(parse(text, &names).map_err(|e| config_err(format!("/chart/metric/{i}/{j}"), e.to_string()))?);
                }
                out.push(r);
            }
            out
        }
    };
    let chart = Chart::new(coords, metric).map_err(|e| config_err("/chart", e.to_string()))?;
    let h = ScalarField::parse(&config.weight.h, &names).map_err(|e| config_err("/weight/h", e.to_string()))?;
    let alpha = constant(&config.weight.alpha, "/weight/alpha")?;
    let gamma = constant(&config.weight.gamma, "/weight/gamma")?;
    if let Some(a) = alpha {
        if !(a > 0.0) {
            return Err(config_err("/weight/alpha", format!("alpha must be positive, got {a}")));
        }
    }
    if alpha.is_some() != gamma.is_some() {
        return Err(config_err("/weight", "give both alpha and gamma, or fit both"));
    }
    if config.samples == 0 {
        return Err(config_err("/samples", "need at least one sample"));
    }
    if !(config.sample_radius > 0.0) {
        return Err(config_err("/sample_radius", "must be positive"));
    }
    Ok(Scenario { config, chart, h, alpha, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"name":"t","chart":{"coords":[{"name":"x"}]},"weight":{"h":"-(1/2)*x^2","alpha":1,"gamma":0}}"#;

    #[test]
    fn minimal_config_compiles() {
        let s = compile(parse_config(MINIMAL).unwrap()).unwrap();
        assert_eq!(s.alpha, Some(1.0));
        assert_eq!(s.chart.dim(), 1);
    }

    #[test]
    fn negative_alpha_rejected_with_pointer() {
        let text = MINIMAL.replace("\"alpha\":1", "\"alpha\":-1");
        match compile(parse_config(&text).unwrap()) {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/weight/alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_json_pointer() {
        let text = MINIMAL.replace("{\"name\":\"x\"}", "{\"name\":\"x\",\"perod\":1}");
        match parse_config(&text) {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/chart/coords/0/perod"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expression_errors_point_at_field() {
        let text = MINIMAL.replace("-(1/2)*x^2", "-(1/2)*y^2");
        match compile(parse_config(&text).unwrap()) {
            Err(Error::Config { pointer, message }) => {
                assert_eq!(pointer, "/weight/h");
                assert!(message.contains("offset"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
