use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hodge_ladder::report::{self, presets, Group, Overrides, RunOutput, Scenario, Status};
use hodge_ladder::Error;
use rayon::prelude::*;

/// Verification runs for ladder and number operators on weighted forms.
#[derive(Debug, Parser)]
#[command(name = "hodge-ladder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every check enabled in the scenario.
    Run(Common),
    /// Randomised exterior-calculus and weighted-operator identity suites.
    VerifyIdentities(Common),
    /// Weight conditions, distance function and Hessian bound.
    CheckConditions(Common),
    /// Exact excited-state tables and their pointwise eigen-equation.
    ExcitedStates(Common),
    /// Weighted Gram matrix, moments and adjointness by quadrature.
    Gram(Common),
    /// Finite-difference spectrum of the conjugated number operator.
    Spectrum(Common),
    /// Heat-kernel residuals on the line and the circle.
    HeatDemo(Common),
    /// List built-in scenarios.
    Presets {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario files (JSON); several run concurrently.
    #[arg(long, num_args = 1..)]
    config: Vec<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for report.json and CSV files.
    #[arg(long, default_value = "hodge-ladder-out")]
    out: PathBuf,
    /// Tolerance for the weight conditions.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Finite-difference grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Truncation radius for quadrature and spectra.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the report JSON to stdout instead of the summary.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { tol: self.tol, kmax: self.kmax, grid: self.grid, radius: self.radius, seed: self.seed }
    }
}

fn groups(cmd: &Command) -> Option<&'static [Group]> {
    match cmd {
        Command::Run(_) | Command::Presets { .. } => None,
        Command::VerifyIdentities(_) => Some(&[Group::Identities]),
        Command::CheckConditions(_) => Some(&[Group::Conditions]),
        Command::ExcitedStates(_) => Some(&[Group::Conditions, Group::ExcitedStates]),
        Command::Gram(_) => Some(&[Group::Conditions, Group::Gram]),
        Command::Spectrum(_) => Some(&[Group::Conditions, Group::Spectrum]),
        Command::HeatDemo(_) => Some(&[Group::Heat]),
    }
}

/// Scenarios named on the command line; subcommands other than `run` fall back
/// to the line preset when none is given.
fn scenarios(common: &Common, groups: Option<&[Group]>) -> Result<Vec<Scenario>, Error> {
    let mut configs = Vec::new();
    if let Some(name) = &common.preset {
        configs.push(presets::preset_config(name)?);
    }
    for path in &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { pointer: "/".into(), message: format!("{}: {e}", path.display()) })?;
        configs.push(report::parse_config(&text).map_err(|e| with_path(e, path))?);
    }
    if configs.is_empty() {
        if groups.is_none() {
            return Err(Error::Config { pointer: "/".into(), message: "give --config or --preset".into() });
        }
        configs.push(presets::preset_config("r1-gaussian")?);
    }
    configs
        .into_iter()
        .map(|mut c| {
            if let Some(g) = groups {
                report::restrict(&mut c, g);
            }
            report::apply_overrides(&mut c, &common.overrides());
            report::compile(c)
        })
        .collect()
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Config { pointer, message } => Error::Config { pointer, message: format!("{}: {message}", path.display()) },
        other => other,
    }
}

fn print_summary(out: &RunOutput, dir: &Path) {
    let r = &out.report;
    println!("scenario {} (seed {})", r.scenario, r.seed);
    for c in &r.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::EvidenceOnly => "EVID",
            Status::Skipped => "SKIP",
        };
        let resid = match (c.max_residual, c.tolerance) {
            (Some(m), Some(t)) => format!("  max {m:.3e} (tol {t:.1e})"),
            (Some(m), None) => format!("  max {m:.3e}"),
            _ => String::new(),
        };
        println!("  {status} {}{resid}", c.name);
        if let Some(m) = &c.message {
            if c.status != Status::Pass {
                println!("       {m}");
            }
        }
    }
    let s = &r.summary;
    println!(
        "  {} pass, {} fail, {} evidence-only, {} skipped -> {}",
        s.pass,
        s.fail,
        s.evidence_only,
        s.skipped,
        dir.join("report.json").display()
    );
}

fn list_presets(json: bool) {
    if json {
        let v: Vec<_> = presets::PRESETS
            .iter()
            .map(|p| serde_json::json!({ "name": p.name, "summary": p.summary }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&v).expect("static data"));
    } else {
        for p in presets::PRESETS {
            println!("{:<24} {}", p.name, p.summary);
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let groups = groups(&cli.command);
    let common = match &cli.command {
        Command::Presets { json } => {
            list_presets(*json);
            return ExitCode::SUCCESS;
        }
        Command::Run(c)
        | Command::VerifyIdentities(c)
        | Command::CheckConditions(c)
        | Command::ExcitedStates(c)
        | Command::Gram(c)
        | Command::Spectrum(c)
        | Command::HeatDemo(c) => c,
    };
    let scenarios = match scenarios(common, groups) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outputs: Vec<RunOutput> = scenarios.par_iter().map(report::run).collect();
    let single = outputs.len() == 1;
    let mut all_pass = true;
    let mut json_reports = Vec::new();
    for out in &outputs {
        let dir = if single { common.out.clone() } else { common.out.join(&out.report.scenario) };
        if let Err(e) = out.write(&dir) {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
        all_pass &= out.report.passed();
        if common.json {
            json_reports.push(out.report.to_json());
        } else {
            print_summary(out, &dir);
        }
    }
    for j in json_reports {
        print!("{j}");
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
