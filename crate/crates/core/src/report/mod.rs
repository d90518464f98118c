//! Scenario runs: checks in dependency order, a deterministic JSON report and
//! plot-ready CSV artifacts.

pub mod config;
pub mod presets;

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::excited::{self, check_ladder, Ladder, QSqrt2};
use crate::forms::FormJet;
use crate::identities::{appendix_suite, bochner_suite, weighted_suite, IdentityOutcome};
use crate::numeric::heat::{self, HeatKind};
use crate::numeric::spectrum::{convergence_order, fd_spectrum, SpectrumSpec};
use crate::numeric::{self, QuadratureGrid};
use crate::sampling::{halton, random_form, trial_rng};
use crate::weighted::{self, WeightSpec, WeightedPoint, POINT_ORDER};

pub use config::{compile, load_config, parse_config, Scenario, ScenarioConfig};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    EvidenceOnly,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub provenance: Provenance,
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
}

impl Check {
    fn new(name: &str, provenance: Provenance) -> Self {
        Check {
            name: name.to_string(),
            status: Status::Pass,
            provenance,
            max_residual: None,
            mean_residual: None,
            tolerance: None,
            samples: None,
            message: None,
            details: Value::Null,
            artifacts: Vec::new(),
        }
    }

    /// Pass/fail on `max < tolerance` (NaN fails).
    fn residual(name: &str, max: f64, tolerance: f64, samples: usize) -> Self {
        let mut c = Check::new(name, Provenance::Numeric);
        c.max_residual = Some(max);
        c.tolerance = Some(tolerance);
        c.samples = Some(samples);
        c.status = if max < tolerance { Status::Pass } else { Status::Fail };
        c
    }

    fn stats(name: &str, residuals: &[f64], tolerance: f64) -> Self {
        let max = residuals.iter().fold(0.0f64, |m, r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r.abs()) });
        let mut c = Check::residual(name, max, tolerance, residuals.len());
        if !residuals.is_empty() {
            c.mean_residual = Some(residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64);
        } else {
            c.status = Status::Fail;
            c.message = Some("no samples".into());
        }
        c
    }

    fn evidence(mut self, supported: bool, note: Option<String>) -> Self {
        self.status = Status::EvidenceOnly;
        let mut d = match self.details {
            Value::Object(m) => m,
            _ => serde_json::Map::new(),
        };
        d.insert("supported".into(), Value::Bool(supported));
        self.details = Value::Object(d);
        if note.is_some() {
            self.message = note;
        }
        self
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    fn with_message(mut self, m: impl Into<String>) -> Self {
        self.message = Some(m.into());
        self
    }

    fn failed(name: &str, err: &Error) -> Self {
        let mut c = Check::new(name, Provenance::Numeric);
        c.status = Status::Fail;
        c.message = Some(format!("error: {err}"));
        c
    }

    fn skipped(name: &str, reason: &str) -> Self {
        let mut c = Check::new(name, Provenance::Numeric);
        c.status = Status::Skipped;
        c.message = Some(format!("skipped: {reason}"));
        c
    }

    pub fn is_hard_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub evidence_only: usize,
    pub skipped: usize,
    pub all_hard_checks_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub versions: Value,
    pub conventions: Value,
    pub config: ScenarioConfig,
    pub constants: Value,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.summary.all_hard_checks_pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Report plus CSV files, not yet written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    /// Writes `report.json`, the artifacts, and `report.meta.json` (the only
    /// file carrying a timestamp).
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, bytes) in &self.artifacts {
            let p = dir.join(name);
            std::fs::write(&p, bytes)?;
            written.push(p);
        }
        let p = dir.join("report.json");
        std::fs::write(&p, self.report.to_json())?;
        written.push(p);
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = json!({ "report": "report.json", "generated_at_unix": secs });
        let p = dir.join("report.meta.json");
        std::fs::write(&p, serde_json::to_string_pretty(&meta)? + "\n")?;
        written.push(p);
        Ok(written)
    }
}

/// Check groups a subcommand can restrict a run to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Conditions,
    Commutator,
    Identities,
    ExcitedStates,
    Gram,
    Spectrum,
    Heat,
    LevelSets,
}

/// Keeps only the listed groups, enabling any that the config left out with defaults.
pub fn restrict(config: &mut ScenarioConfig, groups: &[Group]) {
    let old = std::mem::take(&mut config.checks);
    let c = &mut config.checks;
    for g in groups {
        match g {
            Group::Conditions => c.conditions = Some(old.conditions.clone().unwrap_or_default()),
            Group::Commutator => c.commutator = Some(old.commutator.clone().unwrap_or_default()),
            Group::Identities => c.identities = Some(old.identities.clone().unwrap_or_default()),
            Group::ExcitedStates => c.excited_states = Some(old.excited_states.clone().unwrap_or_default()),
            Group::Gram => c.gram = Some(old.gram.clone().unwrap_or_default()),
            Group::Spectrum => c.spectrum = Some(old.spectrum.clone().unwrap_or_default()),
            Group::Heat => c.heat = Some(old.heat.clone().unwrap_or_default()),
            Group::LevelSets => c.level_sets = Some(old.level_sets.clone().unwrap_or_default()),
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub kmax: Option<usize>,
    pub grid: Option<usize>,
    pub radius: Option<f64>,
    pub seed: Option<u64>,
}

pub fn apply_overrides(config: &mut ScenarioConfig, o: &Overrides) {
    if let Some(t) = o.tol {
        config.tolerances.conditions = t;
    }
    if let Some(k) = o.kmax {
        if let Some(e) = config.checks.excited_states.as_mut() {
            e.kmax = k;
        }
        if let Some(g) = config.checks.gram.as_mut() {
            g.kmax = k;
        }
    }
    if let Some(n) = o.grid {
        if let Some(s) = config.checks.spectrum.as_mut() {
            s.grid = n;
        }
    }
    if let Some(r) = o.radius {
        if let Some(g) = config.checks.gram.as_mut() {
            g.radius = r;
        }
        if let Some(s) = config.checks.spectrum.as_mut() {
            s.radius = r;
        }
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    samples: Vec<Vec<f64>>,
    checks: Vec<Check>,
    artifacts: Vec<(String, Vec<u8>)>,
    /// `None` when the weight conditions were not checked.
    conditions_ok: Option<bool>,
    constants: Option<(f64, f64)>,
}

impl Ctx<'_> {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn weight(&self) -> Option<WeightSpec> {
        let (a, g) = self.constants?;
        self.s.weight(a, g).ok()
    }

    /// Reason to skip checks that need the weight conditions, if any.
    fn needs_conditions(&self) -> Option<String> {
        if self.conditions_ok == Some(false) {
            return Some("the weight conditions failed".into());
        }
        self.needs_weight()
    }

    fn needs_weight(&self) -> Option<String> {
        match self.constants {
            None => Some("alpha and gamma are neither given nor fitted".into()),
            Some((a, _)) if !(a > 0.0) => Some(format!("alpha = {a} is not positive")),
            _ => None,
        }
    }
}

/// Runs every enabled check of the scenario. Module errors become failed
/// checks, so a report is produced in all cases.
pub fn run(s: &Scenario) -> RunOutput {
    let cfg = &s.config;
    let samples = halton(&s.chart.sample_box(cfg.sample_radius), cfg.samples);
    let mut ctx = Ctx {
        s,
        samples,
        checks: Vec::new(),
        artifacts: Vec::new(),
        conditions_ok: None,
        constants: s.alpha.zip(s.gamma),
    };
    if let Some(c) = &cfg.checks.conditions {
        run_conditions(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.commutator {
        run_commutator(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.identities {
        run_identities(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.excited_states {
        run_excited(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.gram {
        run_gram(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.spectrum {
        run_spectrum(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.heat {
        run_heat(&mut ctx, c);
    }
    if let Some(c) = &cfg.checks.level_sets {
        run_level_sets(&mut ctx, c);
    }
    let count = |st: Status| ctx.checks.iter().filter(|c| c.status == st).count();
    let summary = Summary {
        pass: count(Status::Pass),
        fail: count(Status::Fail),
        evidence_only: count(Status::EvidenceOnly),
        skipped: count(Status::Skipped),
        all_hard_checks_pass: count(Status::Fail) == 0,
    };
    let constants = match ctx.constants {
        Some((a, g)) => json!({ "alpha": a, "gamma": g, "fitted": s.alpha.is_none() }),
        None => Value::Null,
    };
    let report = Report {
        report_version: REPORT_VERSION,
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        versions: json!({ "hodge-ladder": env!("CARGO_PKG_VERSION") }),
        conventions: json!({
            "laplace_beltrami": "nonnegative: -div grad",
            "weighted_measure": "exp(2h) times the Riemannian volume",
            "heat_kernel": "d rho/dt = (1/2) d^2 rho/dx^2, variance t on the line",
        }),
        config: cfg.clone(),
        constants,
        checks: ctx.checks,
        summary,
    };
    RunOutput { report, artifacts: ctx.artifacts }
}

fn run_conditions(ctx: &mut Ctx, c: &config::ConditionsCheck) {
    let s = ctx.s;
    let tol = &s.config.tolerances;
    let rep = match weighted::check_conditions(&s.chart, &s.h, ctx.constants, &ctx.samples, tol.conditions) {
        Ok(r) => r,
        Err(e) => {
            ctx.push(Check::failed(weighted::LAPLACIAN_CONDITION, &e));
            ctx.push(Check::failed(weighted::ENERGY_CONDITION, &e));
            ctx.conditions_ok = Some(false);
            return;
        }
    };
    ctx.constants = Some((rep.alpha, rep.gamma));
    ctx.conditions_ok = Some(rep.pass());
    for st in &rep.stats {
        let mut check = Check::residual(&st.name, st.max, st.tolerance, st.samples);
        check.mean_residual = Some(st.mean);
        check.status = if st.pass { Status::Pass } else { Status::Fail };
        check = check.with_details(json!({
            "alpha": rep.alpha,
            "gamma": rep.gamma,
            "fitted": rep.fitted,
            "energy_fit": rep.energy_fit.map(|(a, g)| json!({ "alpha": a, "gamma": g })),
        }));
        if let Some(msg) = &rep.incompatibility {
            check.message = Some(msg.clone());
        }
        ctx.push(check);
    }

    let names = [
        "distance-round-trip",
        weighted::HARMONIC_CONDITION,
        weighted::UNIT_GRADIENT_CONDITION,
    ];
    if c.distance {
        if let Some(reason) = ctx.needs_conditions() {
            for n in names {
                ctx.push(Check::skipped(n, &reason));
            }
        } else {
            let (a, g) = ctx.constants.expect("checked above");
            match distance_checks(ctx, a, g, c.distance_exclude) {
                Ok(cs) => cs.into_iter().for_each(|x| ctx.push(x)),
                Err(e) => names.iter().for_each(|n| ctx.push(Check::failed(n, &e))),
            }
        }
    }
    if c.hessian {
        if let Some(reason) = ctx.needs_conditions() {
            ctx.push(Check::skipped("hessian-ricci-identity", &reason));
            ctx.push(Check::skipped("hessian-bound", &reason));
        } else {
            match hessian_checks(ctx) {
                Ok(cs) => cs.into_iter().for_each(|x| ctx.push(x)),
                Err(e) => {
                    ctx.push(Check::failed("hessian-ricci-identity", &e));
                    ctx.push(Check::failed("hessian-bound", &e));
                }
            }
        }
    }
}

fn distance_checks(ctx: &Ctx, a: f64, g: f64, exclude: f64) -> Result<Vec<Check>> {
    let s = ctx.s;
    let tol = &s.config.tolerances;
    weighted::check_r_defined(&s.h, a, g, &ctx.samples)?;
    let r = weighted::h_to_r(&s.h, a, g);
    let back = weighted::r_to_h(&r, a, g);
    let mut trip = Vec::with_capacity(ctx.samples.len());
    for p in &ctx.samples {
        let h = s.h.value(p)?;
        trip.push((back.value(p)? - h) / h.abs().max(1.0));
    }
    let mut out = vec![Check::stats("distance-round-trip", &trip, tol.round_trip)
        .with_details(json!({ "r": r.to_string() }))];
    let rep = weighted::check_harmonic_distance(&s.chart, &r, &ctx.samples, exclude, (tol.harmonic, tol.unit_gradient))?;
    for st in rep.stats {
        let mut check = Check::residual(&st.name, st.max, st.tolerance, st.samples);
        check.mean_residual = Some(st.mean);
        check.status = if st.pass { Status::Pass } else { Status::Fail };
        out.push(check.with_details(json!({ "excluded_below": exclude })));
    }
    Ok(out)
}

fn hessian_checks(ctx: &Ctx) -> Result<Vec<Check>> {
    let s = ctx.s;
    let w = ctx.weight().ok_or_else(|| Error::Precondition("no weight".into()))?;
    let pts: Vec<Vec<f64>> = ctx.samples.iter().take(200).cloned().collect();
    let c = weighted::ricci_lower_bound(&s.chart, &pts)?;
    let mut ident = Vec::new();
    let mut bound = Vec::new();
    for p in &pts {
        let b = w.hessian_bound(c, p)?;
        ident.push(b.identity_residual);
        bound.push(b.bound_residual);
    }
    let tol = s.config.tolerances.hessian;
    let worst = bound.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c1 = w.alpha * w.alpha + 2.0 * c * w.gamma;
    let c2 = -2.0 * c * w.alpha;
    let mut b = Check::new("hessian-bound", Provenance::Numeric);
    b.max_residual = Some(worst);
    b.tolerance = Some(tol);
    b.samples = Some(pts.len());
    let b = b
        .with_details(json!({ "ricci_lower_bound": c, "c1": c1, "c2": c2 }))
        .evidence(worst <= tol, Some("Ricci lower bound estimated from samples; residual is |Hess h|^2 - (c1 + c2 h), <= 0 when the bound holds".into()));
    Ok(vec![Check::stats("hessian-ricci-identity", &ident, tol), b])
}

fn relative(diff: &FormJet, reference: &FormJet) -> f64 {
    diff.max_abs_value() / reference.max_abs_value().max(1.0)
}

fn run_commutator(ctx: &mut Ctx, c: &config::CommutatorCheck) {
    let s = ctx.s;
    let tol = s.config.tolerances.commutator;
    let n = s.chart.dim();
    let pts: Vec<Vec<f64>> = ctx.samples.iter().take(c.points).cloned().collect();
    let all: Vec<usize> = (0..=n).collect();
    let formula = || -> Result<(Vec<f64>, Vec<f64>)> {
        let mut res = Vec::new();
        let mut pow = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            let mut rng = trial_rng(s.config.seed, i as u64);
            let w = random_form(&mut rng, n, &all).jet(p, POINT_ORDER)?;
            let wp = WeightedPoint::new(&s.chart, &s.h, p)?;
            let comm = wp.commutator(&w)?;
            res.push(relative(&(&comm - &wp.commutator_formula(&w)?), &comm));
            let lap = wp.laplace_h()?;
            for j in 0..=c.max_power {
                let hj = FormJet::scalar(wp.power(j));
                let cj = wp.commutator(&hj)?;
                pow.push(relative(&(&cj - &hj.mul_jet(&lap)), &cj));
            }
        }
        Ok((res, pow))
    };
    match formula() {
        Ok((res, pow)) => {
            ctx.push(Check::stats("commutator-formula", &res, tol));
            ctx.push(Check::stats("commutator-on-powers", &pow, tol));
        }
        Err(e) => {
            ctx.push(Check::failed("commutator-formula", &e));
            ctx.push(Check::failed("commutator-on-powers", &e));
        }
    }
    if let Some(reason) = ctx.needs_conditions() {
        ctx.push(Check::skipped("commutator-on-power-forms", &reason));
        return;
    }
    let forms = || -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for p in &pts {
            let wp = WeightedPoint::new(&s.chart, &s.h, p)?;
            let lap = wp.laplace_h()?;
            for j in 0..=c.max_power {
                let f = wp.power_dh(j);
                let cj = wp.commutator(&f)?;
                out.push(relative(&(&cj - &f.mul_jet(&lap)), &cj));
            }
        }
        Ok(out)
    };
    ctx.push(match forms() {
        Ok(r) => Check::stats("commutator-on-power-forms", &r, tol),
        Err(e) => Check::failed("commutator-on-power-forms", &e),
    });
}

fn outcome_check(prefix: &str, o: &IdentityOutcome) -> Check {
    let name = if o.name == prefix { o.name.clone() } else { format!("{prefix}:{}", o.name) };
    Check::residual(&name, o.max_residual, o.tolerance, o.trials)
}

fn run_identities(ctx: &mut Ctx, c: &config::IdentitiesCheck) {
    let tol = ctx.s.config.tolerances.clone();
    let seed = ctx.s.config.seed;
    let suites: [(&str, Result<Vec<IdentityOutcome>>); 3] = [
        ("forms", appendix_suite(seed, c.trials, tol.identities)),
        ("weighted", weighted_suite(seed, c.trials, tol.commutator)),
        ("bochner", bochner_suite(seed, c.bochner_trials, tol.bochner)),
    ];
    for (prefix, res) in suites {
        match res {
            Ok(outs) => outs.iter().for_each(|o| ctx.push(outcome_check(prefix, o))),
            Err(e) => ctx.push(Check::failed(prefix, &e)),
        }
    }
}

fn run_excited(ctx: &mut Ctx, c: &config::ExcitedCheck) {
    let s = ctx.s;
    if let Some(reason) = ctx.needs_weight() {
        ctx.push(Check::skipped("excited-states-exact", &reason));
        ctx.push(Check::skipped("excited-states-pointwise", &reason));
        return;
    }
    let (a, g) = ctx.constants.expect("checked");
    // binary floats are exact rationals, so the table arithmetic stays exact
    let (Some(ar), Some(gr)) = (BigRational::from_float(a), BigRational::from_float(g)) else {
        ctx.push(Check::failed("excited-states-exact", &Error::Precondition("constants are not finite".into())));
        return;
    };
    let ladder = Ladder::new(QSqrt2::rational(ar), QSqrt2::rational(gr));
    let lc = check_ladder(&ladder, c.kmax, 0.0);
    let mut exact = Check::new("excited-states-exact", Provenance::Exact);
    exact.status = if lc.pass() { Status::Pass } else { Status::Fail };
    exact.max_residual = Some(lc.max_residual);
    exact.tolerance = Some(0.0);
    exact.samples = Some(c.kmax + 1);
    exact.details = json!({
        "kmax": c.kmax,
        "eigen": lc.eigen,
        "lowering": lc.lowering,
        "commutator": lc.commutator,
        "raise_then_lower": lc.raise_then_lower,
        "shape": lc.shape,
    });
    let mut buf = Vec::new();
    match excited::write_csv(&ladder.states(c.kmax), &mut buf) {
        Ok(()) => {
            ctx.artifacts.push(("excited_states.csv".into(), buf));
            exact.artifacts.push("excited_states.csv".into());
        }
        Err(e) => exact = Check::failed("excited-states-exact", &e),
    }
    ctx.push(exact);

    if let Some(reason) = ctx.needs_conditions() {
        ctx.push(Check::skipped("excited-states-pointwise", &reason));
        return;
    }
    let states = Ladder::new(a, g).states(c.kmax);
    let pointwise = || -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for p in ctx.samples.iter().take(c.points) {
            let wp = WeightedPoint::new(&s.chart, &s.h, p)?;
            for (k, st) in states.iter().enumerate() {
                let phi = st.to_form(&wp);
                let n_phi = wp.number(&phi)?;
                let expect = phi.scale(a * k as f64);
                out.push(relative(&(&n_phi - &expect), &expect));
            }
        }
        Ok(out)
    };
    ctx.push(match pointwise() {
        Ok(r) => Check::stats("excited-states-pointwise", &r, s.config.tolerances.excited_pointwise),
        Err(e) => Check::failed("excited-states-pointwise", &e),
    });
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn run_gram(ctx: &mut Ctx, c: &config::GramCheck) {
    let names = [
        "gram-orthogonality",
        "norm-law",
        "power-norm-consistency",
        "moment-integrability",
        "ladder-adjointness",
        "weighted-dirac-symmetry",
    ];
    if let Some(reason) = ctx.needs_conditions() {
        names.iter().for_each(|n| ctx.push(Check::skipped(n, &reason)));
        return;
    }
    let w = match ctx.weight() {
        Some(w) => w,
        None => return,
    };
    let tol = ctx.s.config.tolerances.clone();
    let seed = ctx.s.config.seed;
    let grid = match QuadratureGrid::with_counts(&w.chart, Some(&w.h), c.nodes, c.periodic_nodes, c.radius) {
        Ok(g) => g,
        Err(e) => {
            names.iter().for_each(|n| ctx.push(Check::failed(n, &e)));
            return;
        }
    };
    match numeric::gram_matrix(&grid, &w, c.kmax) {
        Ok(g) => {
            let diag: Vec<f64> = (0..=c.kmax).map(|k| g.matrix[k][k]).collect();
            let details = json!({ "kmax": c.kmax, "nodes": c.nodes, "radius": c.radius, "diagonal": diag });
            let mut o = Check::residual("gram-orthogonality", g.max_off_ratio, tol.gram_ratio, grid.len()).with_details(details.clone());
            let mut nl = Check::residual("norm-law", g.norm_law_error, tol.norm_law, c.kmax + 1).with_details(details);
            match csv_bytes(|b| numeric::write_gram_csv(&g, b)) {
                Ok(bytes) => {
                    ctx.artifacts.push(("gram.csv".into(), bytes));
                    o.artifacts.push("gram.csv".into());
                    nl.artifacts.push("gram.csv".into());
                }
                Err(e) => o = Check::failed("gram-orthogonality", &e),
            }
            ctx.push(o);
            ctx.push(nl);
        }
        Err(e) => {
            ctx.push(Check::failed("gram-orthogonality", &e));
            ctx.push(Check::failed("norm-law", &e));
        }
    }
    ctx.push(match numeric::power_norm_consistency(&grid, &w, c.moments_jmax) {
        Ok(r) => Check::residual("power-norm-consistency", r, tol.power_norms, c.moments_jmax + 1),
        Err(e) => Check::failed("power-norm-consistency", &e),
    });
    match numeric::moment_estimate(&w, c.moments_jmax, c.radius, c.nodes, c.periodic_nodes, tol.moments) {
        Ok(m) => {
            let worst = m.moments.iter().fold(0.0f64, |a, x| a.max(x.tail_estimate / x.value.abs().max(1.0)));
            let mut ch = Check::new("moment-integrability", Provenance::Numeric);
            ch.max_residual = Some(worst);
            ch.tolerance = Some(tol.moments);
            ch.samples = Some(m.moments.len());
            ch.details = json!({ "radius": c.radius, "jmax": c.moments_jmax });
            let note = if m.finite {
                "truncated moments settle when the radius doubles".to_string()
            } else {
                "moments keep growing when the truncation radius doubles: the weighted measure is not finite, \
                 so only the infinite-measure statements apply"
                    .to_string()
            };
            ch = ch.evidence(m.finite, Some(note));
            match csv_bytes(|b| numeric::write_moments_csv(&m, b)) {
                Ok(bytes) => {
                    ctx.artifacts.push(("moments.csv".into(), bytes));
                    ch.artifacts.push("moments.csv".into());
                }
                Err(e) => ch = Check::failed("moment-integrability", &e),
            }
            ctx.push(ch);
        }
        Err(e) => ctx.push(Check::failed("moment-integrability", &e)),
    }
    let adj = QuadratureGrid::with_counts(&w.chart, Some(&w.h), c.adjoint_nodes, c.periodic_nodes, c.adjoint_radius)
        .and_then(|g| numeric::adjointness(&w, &g, seed, c.adjoint_trials));
    match adj {
        Ok(r) => {
            ctx.push(Check::residual("ladder-adjointness", r.ladder, tol.adjoint, r.trials));
            ctx.push(Check::residual("weighted-dirac-symmetry", r.weighted_dirac, tol.adjoint, r.trials));
        }
        Err(e) => {
            ctx.push(Check::failed("ladder-adjointness", &e));
            ctx.push(Check::failed("weighted-dirac-symmetry", &e));
        }
    }
}

fn run_spectrum(ctx: &mut Ctx, c: &config::SpectrumCheck) {
    let names = ["spectrum-zero-mode", "spectrum-gaps", "spectrum-containment"];
    if let Some(reason) = ctx.needs_conditions() {
        names.iter().for_each(|n| ctx.push(Check::skipped(n, &reason)));
        if c.convergence {
            ctx.push(Check::skipped("spectrum-convergence-order", &reason));
        }
        return;
    }
    let Some(w) = ctx.weight() else { return };
    let tol = ctx.s.config.tolerances.clone();
    let spec = SpectrumSpec { grid: c.grid, periodic_nodes: c.periodic_nodes, radius: c.radius, count: c.count };
    let r = match fd_spectrum(&w, &spec) {
        Ok(r) => r,
        Err(e) => {
            names.iter().for_each(|n| ctx.push(Check::failed(n, &e)));
            return;
        }
    };
    let separable = r.method != "dense";
    let details = json!({
        "method": r.method,
        "grid": r.grid,
        "spacing": r.spacing,
        "radius": r.radius,
        "eigenvalues": r.eigenvalues,
        "zero_mode": r.zero_mode,
    });
    let caveat = "several open directions: the truncated problem is not known to approximate the spectrum, reported as evidence only";
    let mut zm = Check::residual("spectrum-zero-mode", r.max_zero_mode_error(), tol.spectrum, r.zero_mode.len()).with_details(details.clone());
    let mut gaps = Check::residual("spectrum-gaps", r.max_gap_error(w.alpha), tol.spectrum_gap, r.zero_mode.len().saturating_sub(1));
    if !separable {
        let ok_zm = zm.status == Status::Pass;
        let ok_gaps = gaps.status == Status::Pass;
        zm = zm.evidence(ok_zm, Some(caveat.into()));
        gaps = gaps.evidence(ok_gaps, Some(caveat.into()));
    }
    let errors: Vec<f64> = r.eigenvalues.iter().zip(&r.targets).map(|(l, t)| l - t).collect();
    let worst = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let mut cont = Check::new("spectrum-containment", Provenance::Numeric);
    cont.max_residual = Some(worst);
    cont.tolerance = Some(tol.spectrum);
    cont.samples = Some(errors.len());
    cont.details = json!({ "targets": r.targets });
    let mut cont = cont.evidence(
        worst < tol.spectrum,
        Some("lowest eigenvalues against the nearest of alpha*k plus separated-mode offsets".into()),
    );
    let bytes = csv_bytes(|b| {
        let mut wtr = csv::Writer::from_writer(b);
        wtr.write_record(["index", "eigenvalue", "target", "error"])?;
        for (i, ((l, t), e)) in r.eigenvalues.iter().zip(&r.targets).zip(&errors).enumerate() {
            wtr.write_record([i.to_string(), format!("{l:e}"), format!("{t:e}"), format!("{e:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    });
    match bytes {
        Ok(b) => {
            ctx.artifacts.push(("spectrum.csv".into(), b));
            zm.artifacts.push("spectrum.csv".into());
            cont.artifacts.push("spectrum.csv".into());
        }
        Err(e) => cont = Check::failed("spectrum-containment", &e),
    }
    ctx.push(zm);
    ctx.push(gaps);
    ctx.push(cont);
    if c.convergence {
        if !separable {
            ctx.push(Check::skipped("spectrum-convergence-order", "dense fallback grids are too coarse for a rate"));
            return;
        }
        ctx.push(match convergence_order(&w, &spec, c.grid / 2, c.grid) {
            Ok((order, e1, e2)) => {
                let mut ch = Check::new("spectrum-convergence-order", Provenance::Numeric);
                ch.max_residual = Some((order - 2.0).abs());
                ch.tolerance = Some(0.2);
                ch.samples = Some(2);
                ch.status = if (order - 2.0).abs() < 0.2 { Status::Pass } else { Status::Fail };
                ch.with_details(json!({ "order": order, "coarse_error": e1, "fine_error": e2 }))
            }
            Err(e) => Check::failed("spectrum-convergence-order", &e),
        });
    }
}

fn run_heat(ctx: &mut Ctx, c: &config::HeatCheck) {
    let tol = ctx.s.config.tolerances.clone();
    let circle_x: Vec<f64> = (0..c.circle_points).map(|k| std::f64::consts::TAU * k as f64 / c.circle_points as f64).collect();
    let rows = heat::heat_demo(HeatKind::Line, &c.line_times, &c.line_points)
        .and_then(|mut l| {
            l.extend(heat::heat_demo(HeatKind::Circle, &c.circle_times, &circle_x)?);
            Ok(l)
        });
    let rows = match rows {
        Ok(r) => r,
        Err(e) => {
            for n in ["heat-varadhan", "heat-identity", "heat-circle-curvature"] {
                ctx.push(Check::failed(n, &e));
            }
            return;
        }
    };
    let line: Vec<_> = rows.iter().filter(|r| r.kind == HeatKind::Line).collect();
    let closed: Vec<f64> = line
        .iter()
        .map(|r| r.varadhan_residual - (-(r.t / 2.0) * (2.0 * std::f64::consts::PI * r.t).ln()))
        .collect();
    let mut v = Check::stats("heat-varadhan", &closed, tol.heat_varadhan);
    // mean |residual| per time must shrink as t decreases
    let mut times = c.line_times.clone();
    times.sort_by(|a, b| b.total_cmp(a));
    let per_t: Vec<f64> = times
        .iter()
        .map(|&t| {
            let vals: Vec<f64> = line.iter().filter(|r| r.t == t).map(|r| r.varadhan_residual.abs()).collect();
            vals.iter().sum::<f64>() / vals.len().max(1) as f64
        })
        .collect();
    let decreasing = per_t.windows(2).all(|w| w[1] < w[0]);
    if !decreasing {
        v.status = Status::Fail;
        v.message = Some("Varadhan residual does not shrink as t decreases".into());
    }
    v = v.with_details(json!({ "times": times, "mean_abs_residual": per_t }));
    let ident: Vec<f64> = rows.iter().map(|r| r.identity_residual).collect();
    let id = Check::stats("heat-identity", &ident, tol.heat);
    let spreads: Vec<f64> = c.circle_times.iter().map(|&t| heat::log_second_derivative_spread(&rows, t)).collect();
    let min_spread = spreads.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut curv = Check::new("heat-circle-curvature", Provenance::Numeric);
    curv.samples = Some(c.circle_points * c.circle_times.len());
    curv.tolerance = Some(0.01);
    curv.status = if min_spread > 0.01 { Status::Pass } else { Status::Fail };
    curv = curv
        .with_details(json!({ "times": c.circle_times, "spread": spreads }))
        .with_message("max - min of the second x-derivative of log rho on the circle; must exceed the tolerance");
    match csv_bytes(|b| heat::write_heat_csv(&rows, b)) {
        Ok(b) => {
            ctx.artifacts.push(("heat.csv".into(), b));
            v.artifacts.push("heat.csv".into());
        }
        Err(e) => v = Check::failed("heat-varadhan", &e),
    }
    ctx.push(v);
    ctx.push(id);
    ctx.push(curv);
}

fn run_level_sets(ctx: &mut Ctx, c: &config::LevelSetCheck) {
    let s = ctx.s;
    if let Some(reason) = ctx.needs_weight() {
        ctx.push(Check::skipped("level-set-volume", &reason));
        return;
    }
    let (a, g) = ctx.constants.expect("checked");
    let res = weighted::check_r_defined(&s.h, a, g, &ctx.samples).and_then(|_| {
        let r = weighted::h_to_r(&s.h, a, g);
        numeric::level_set_volume(&s.chart, &r, &c.values, c.radius, c.nodes)
    });
    ctx.push(match res {
        Ok(v) => Check::residual("level-set-volume", v.variation, s.config.tolerances.level_sets, v.values.len())
            .with_details(json!({ "values": v.values, "volumes": v.volumes })),
        Err(e) => Check::failed("level-set-volume", &e),
    });
}
