use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hodge-ladder"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn identity_reports_are_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["verify-identities", "--seed", "42"], d);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb);
    let c = run(&["verify-identities", "--seed", "7"], &dir.path().join("c"));
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(std::fs::read(dir.path().join("c/report.json")).unwrap(), ra);
}

#[test]
fn passing_preset_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["excited-states", "--preset", "r1-gaussian"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS excited-states-exact"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report_version"], 1);
    assert!(dir.path().join("excited_states.csv").exists());
    assert!(dir.path().join("report.meta.json").exists());
}

#[test]
fn incompatible_weight_exits_two_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check-conditions", "--preset", "gaussian-r2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("FAIL weight-energy-constant"), "{text}");
    assert!(text.contains("no single alpha"), "{text}");
}

#[test]
fn control_scenario_fails_level_sets() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--preset", "rxt2-control", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let level = checks.iter().find(|c| c["name"] == "level-set-volume").unwrap();
    assert_eq!(level["status"], "fail");
}

#[test]
fn negative_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"name": "bad", "chart": {"coords": [{"name": "x"}]}, "weight": {"h": "-x^2/2", "alpha": -1, "gamma": 0}, "checks": {"conditions": {}}}"#,
    )
    .unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/weight/alpha"), "{err}");
}

#[test]
fn malformed_expression_points_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"name": "bad", "chart": {"coords": [{"name": "x"}]}, "weight": {"h": "x +* 2"}, "checks": {}}"#).unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/weight/h"));
}

#[test]
fn usage_errors_exit_one() {
    let o = bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["run", "--preset", "nowhere"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn presets_are_listed() {
    let o = bin().args(["presets", "--json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    for n in ["r1-gaussian", "rxt2-volume-preserving", "rxt2-control", "gaussian-r2"] {
        assert!(names.contains(&n), "{names:?}");
    }
}

#[test]
fn several_configs_get_their_own_directories() {
    let dir = tempfile::tempdir().unwrap();
    let mk = |name: &str, h: &str| {
        let p = dir.path().join(format!("{name}.json"));
        std::fs::write(
            &p,
            format!(r#"{{"name": "{name}", "chart": {{"coords": [{{"name": "x"}}]}}, "weight": {{"h": "{h}", "alpha": 1, "gamma": 0}}, "checks": {{"conditions": {{"hessian": false}}}}}}"#),
        )
        .unwrap();
        p
    };
    let a = mk("one", "-x^2/2");
    let b = mk("two", "-(x - 1)^2/2");
    let out = dir.path().join("out");
    let o = bin()
        .args(["check-conditions", "--config", a.to_str().unwrap(), b.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(out.join("one/report.json").exists());
    assert!(out.join("two/report.json").exists());
}
