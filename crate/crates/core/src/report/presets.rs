//! Built-in scenarios, stored as JSON so they go through the same loader as files.

use crate::error::{Error, Result};
use crate::report::config::{compile, parse_config, Scenario};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub json: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "r1-gaussian",
        summary: "line with h = -x^2/2, alpha = 1, gamma = 0; every check enabled",
        json: r#"{
  "name": "r1-gaussian",
  "chart": {"coords": [{"name": "x"}]},
  "weight": {"h": "-(1/2)*x^2", "alpha": 1, "gamma": 0},
  "checks": {
    "conditions": {},
    "commutator": {},
    "excited_states": {"kmax": 12},
    "gram": {"kmax": 6, "nodes": 200, "radius": 12},
    "spectrum": {"grid": 2000, "radius": 10, "count": 5},
    "heat": {},
    "level_sets": {}
  }
}"#,
    },
    Preset {
        name: "r2-hx",
        summary: "plane with h = -x1^2/2 (alpha = 1): weight conditions hold, measure is not finite",
        json: r#"{
  "name": "r2-hx",
  "chart": {"coords": [{"name": "x1"}, {"name": "x2"}]},
  "weight": {"h": "-(1/2)*x1^2", "alpha": 1, "gamma": 0},
  "checks": {
    "conditions": {},
    "commutator": {},
    "excited_states": {"kmax": 8},
    "gram": {"kmax": 4, "nodes": 80, "radius": 10, "moments_jmax": 2, "adjoint_trials": 1, "adjoint_nodes": 60, "adjoint_radius": 6},
    "spectrum": {"grid": 30, "radius": 6, "count": 5, "convergence": false}
  }
}"#,
    },
    Preset {
        name: "r3-hx",
        summary: "three-space with h = -x1^2, alpha = 2, gamma = 0",
        json: r#"{
  "name": "r3-hx",
  "chart": {"coords": [{"name": "x1"}, {"name": "x2"}, {"name": "x3"}]},
  "weight": {"h": "-x1^2", "alpha": 2, "gamma": 0},
  "checks": {
    "conditions": {},
    "commutator": {"points": 100},
    "excited_states": {"kmax": 8}
  }
}"#,
    },
    Preset {
        name: "rxt2-volume-preserving",
        summary: "line times two-torus, metric diag(1, e^s, e^-s), h = -s^2/2",
        json: r#"{
  "name": "rxt2-volume-preserving",
  "chart": {
    "coords": [{"name": "s"}, {"name": "x1", "period": 6.283185307179586}, {"name": "x2", "period": 6.283185307179586}],
    "metric": [["1", "0", "0"], ["0", "exp(s)", "0"], ["0", "0", "exp(-s)"]]
  },
  "weight": {"h": "-(1/2)*s^2", "alpha": 1, "gamma": 0},
  "checks": {
    "conditions": {},
    "commutator": {"points": 100},
    "excited_states": {"kmax": 8},
    "gram": {"kmax": 4, "nodes": 120, "periodic_nodes": 16, "radius": 12, "moments_jmax": 3, "adjoint_trials": 1, "adjoint_nodes": 60, "adjoint_radius": 6},
    "spectrum": {"grid": 1000, "periodic_nodes": 16, "radius": 10, "count": 5},
    "level_sets": {}
  }
}"#,
    },
    Preset {
        name: "rxt2-control",
        summary: "line times two-torus with metric diag(1, e^s, 1): slice volumes vary, weight conditions fail",
        json: r#"{
  "name": "rxt2-control",
  "chart": {
    "coords": [{"name": "s"}, {"name": "x1", "period": 6.283185307179586}, {"name": "x2", "period": 6.283185307179586}],
    "metric": [["1", "0", "0"], ["0", "exp(s)", "0"], ["0", "0", "1"]]
  },
  "weight": {"h": "-(1/2)*s^2", "alpha": 1, "gamma": 0},
  "checks": {
    "conditions": {"distance": false, "hessian": false},
    "level_sets": {}
  }
}"#,
    },
    Preset {
        name: "gaussian-r2",
        summary: "plane with the Gaussian weight h = -(x1^2 + x2^2)/2; constants fitted",
        json: r#"{
  "name": "gaussian-r2",
  "chart": {"coords": [{"name": "x1"}, {"name": "x2"}]},
  "weight": {"h": "-(1/2)*(x1^2 + x2^2)", "alpha": "fit", "gamma": "fit"},
  "checks": {
    "conditions": {},
    "excited_states": {"kmax": 6},
    "gram": {"kmax": 4, "nodes": 60, "radius": 10}
  }
}"#,
    },
    Preset {
        name: "rxs1-flat",
        summary: "flat cylinder (circumference 2 pi) with h = -s^2/2",
        json: r#"{
  "name": "rxs1-flat",
  "chart": {"coords": [{"name": "s"}, {"name": "theta", "period": 6.283185307179586}]},
  "weight": {"h": "-(1/2)*s^2", "alpha": 1, "gamma": 0},
  "checks": {
    "conditions": {},
    "spectrum": {"grid": 2000, "periodic_nodes": 512, "radius": 10, "count": 8}
  }
}"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn preset_config(name: &str) -> Result<crate::report::config::ScenarioConfig> {
    let p = find(name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Config { pointer: "/".into(), message: format!("unknown preset {name:?}; known: {}", known.join(", ")) }
    })?;
    parse_config(p.json)
}

pub fn load_preset(name: &str) -> Result<Scenario> {
    compile(preset_config(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_compiles() {
        for p in PRESETS {
            let s = load_preset(p.name).unwrap();
            assert_eq!(s.config.name, p.name);
        }
    }

    #[test]
    fn volume_preserving_preset_metric() {
        let s = load_preset("rxt2-volume-preserving").unwrap();
        assert_eq!(s.chart.metric_entry(1, 1).to_string(), "exp(s)");
        assert_eq!(s.chart.metric_entry(2, 2).to_string(), "exp(-s)");
        assert_eq!(s.h.value(&[2.0, 0.0, 0.0]).unwrap(), -2.0);
    }
}
