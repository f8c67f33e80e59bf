//! Scenario configuration: JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use fracheat_core::{CutoffKind, FracParams, Nonlinearity, PicardConfig, QuadratureScheme};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Eval,
    ReduceCheck,
    LemmaScaling,
    SolveBall,
    MovingPlanes,
    Liouville,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Eval,
        Scenario::ReduceCheck,
        Scenario::LemmaScaling,
        Scenario::SolveBall,
        Scenario::MovingPlanes,
        Scenario::Liouville,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Eval => "eval",
            Scenario::ReduceCheck => "reduce-check",
            Scenario::LemmaScaling => "lemma-scaling",
            Scenario::SolveBall => "solve-ball",
            Scenario::MovingPlanes => "moving-planes",
            Scenario::Liouville => "liouville",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Ball problem: grid spacing and the source term by registry name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
}

fn default_h() -> f64 {
    1.0 / 64.0
}

fn default_f() -> String {
    "one".into()
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            h: default_h(),
            f: default_f(),
            coeffs: None,
        }
    }
}

/// Periodic space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub nt: usize,
    #[serde(default = "default_period")]
    pub lx: f64,
    #[serde(default = "default_period")]
    pub lt: f64,
}

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub s: f64,
    #[serde(default)]
    pub scheme: QuadratureScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub picard: PicardConfig,
    /// Space coordinates followed by time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<CutoffKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    /// Random antisymmetric fields in the moving-planes falsification probe.
    #[serde(default)]
    pub probe_fields: usize,
    /// Random fields per reduction check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
}

fn default_samples() -> usize {
    3
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("fracheat-out")
}

pub const FIELD_REGISTRY: [&str; 5] = [
    "gaussian-bump",
    "plane-wave",
    "torsion-profile",
    "shifted-torsion",
    "custom-polynomial-cutoff",
];

/// Command-line values that replace the corresponding config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub n: Option<usize>,
    pub s: Option<f64>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub field: Option<String>,
    pub f: Option<String>,
    pub target_tol: Option<f64>,
    pub point: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<FracParams, HarnessError> {
        FracParams::new(self.n, self.s).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn problem(&self) -> ProblemSpec {
        self.problem.clone().unwrap_or_default()
    }

    /// Scenario-specific checks; every message names the offending key.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut missing = Vec::new();
        let mut bad = Vec::new();
        if let Err(e) = FracParams::new(self.n, self.s) {
            bad.push(match e {
                fracheat_core::Error::Domain(m) => m,
                other => other.to_string(),
            });
        }
        if let Err(e) = self.scheme.validate() {
            bad.push(format!("scheme: {e}"));
        }
        match self.scenario {
            Scenario::Eval => {
                match &self.point {
                    None => missing.push("point"),
                    Some(p) if p.len() != self.n + 1 => bad.push(format!(
                        "point must hold n + 1 = {} numbers (x then t)",
                        self.n + 1
                    )),
                    _ => {}
                }
                match self.field.as_deref() {
                    None => missing.push("field"),
                    Some(f) if !FIELD_REGISTRY.contains(&f) => bad.push(format!(
                        "unknown field '{f}'; expected one of {}",
                        FIELD_REGISTRY.join(", ")
                    )),
                    Some("plane-wave") if self.xi.as_ref().is_some_and(|x| x.len() != self.n) => {
                        bad.push(format!("xi must hold n = {} numbers", self.n))
                    }
                    Some("custom-polynomial-cutoff") if self.coeffs.is_none() => {
                        missing.push("coeffs")
                    }
                    Some("torsion-profile" | "shifted-torsion") if self.n > 2 => {
                        bad.push("torsion fields need n ≤ 2".into())
                    }
                    _ => {}
                }
            }
            Scenario::ReduceCheck => {
                if self.samples == 0 {
                    bad.push("samples must be positive".into());
                }
            }
            Scenario::LemmaScaling => {
                if let Some(r) = &self.r_list {
                    if r.len() < 4 || r.iter().any(|v| !(*v > 0.0)) {
                        bad.push("r_list needs at least 4 positive radii".into());
                    }
                }
            }
            Scenario::SolveBall | Scenario::MovingPlanes => {
                if self.n > 2 {
                    bad.push("ball problems support n ∈ {1, 2}".into());
                }
                let pr = self.problem();
                let k = 1.0 / pr.h;
                if !(pr.h > 0.0) || (k - k.round()).abs() > 1e-9 || k.round() < 2.0 {
                    bad.push(format!(
                        "problem.h must be 1/K with integer K ≥ 2, got {}",
                        pr.h
                    ));
                }
                if let Err(e) = Nonlinearity::from_name(&pr.f, pr.coeffs.as_deref()) {
                    bad.push(format!("problem.f: {e}"));
                }
                if let Some(d) = &self.direction {
                    if d.len() != self.n {
                        bad.push(format!("direction must hold n = {} numbers", self.n));
                    }
                }
                if self
                    .lambdas
                    .as_ref()
                    .is_some_and(|l| l.iter().any(|v| !(*v > -1.0 && *v < 0.0)))
                {
                    bad.push("lambdas must lie in (−1, 0)".into());
                }
            }
            Scenario::Liouville => {
                if let Some(g) = &self.grid {
                    if g.nx < 8 || g.nt < 8 || g.nx % 2 == 1 || g.nt % 2 == 1 {
                        bad.push("grid.nx and grid.nt must be even and at least 8".into());
                    }
                }
            }
        }
        if missing.is_empty() && bad.is_empty() {
            return Ok(());
        }
        let mut msg = format!("invalid {} config:", self.scenario.name());
        if !missing.is_empty() {
            msg.push_str(&format!(
                " missing required field(s) {}",
                missing.join(", ")
            ));
        }
        if !bad.is_empty() {
            if !missing.is_empty() {
                msg.push(';');
            }
            msg.push(' ');
            msg.push_str(&bad.join("; "));
        }
        Err(HarnessError::Config(msg))
    }
}

fn set(obj: &mut Map<String, Value>, key: &str, v: Value) {
    obj.insert(key.to_string(), v);
}

/// Read the JSON config (if any), apply overrides, and validate.
pub fn parse_config(path: Option<&Path>, ov: &Overrides) -> Result<ScenarioConfig, HarnessError> {
    let mut root = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                HarnessError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            serde_json::from_str::<Value>(&text).map_err(|e| {
                HarnessError::Config(format!(
                    "{}: line {} column {}: {e}",
                    p.display(),
                    e.line(),
                    e.column()
                ))
            })?
        }
        None => Value::Object(Map::new()),
    };
    let obj = root
        .as_object_mut()
        .ok_or_else(|| HarnessError::Config("config must be a JSON object".into()))?;
    if let Some(sc) = ov.scenario {
        set(obj, "scenario", Value::String(sc.name().into()));
    }
    if let Some(n) = ov.n {
        set(obj, "n", n.into());
    }
    if let Some(s) = ov.s {
        set(obj, "s", s.into());
    }
    if let Some(seed) = ov.seed {
        set(obj, "seed", seed.into());
    }
    if let Some(out) = &ov.out {
        set(obj, "output_dir", Value::String(out.display().to_string()));
    }
    if let Some(pt) = &ov.point {
        set(obj, "point", pt.iter().map(|&v| Value::from(v)).collect());
    }
    if let Some(f) = &ov.field {
        set(obj, "field", Value::String(f.clone()));
    }
    if ov.h.is_some() || ov.f.is_some() {
        let problem = obj
            .entry("problem")
            .or_insert_with(|| Value::Object(Map::new()));
        let p = problem
            .as_object_mut()
            .ok_or_else(|| HarnessError::Config("problem must be a JSON object".into()))?;
        if let Some(h) = ov.h {
            set(p, "h", h.into());
        }
        if let Some(f) = &ov.f {
            set(p, "f", Value::String(f.clone()));
        }
    }
    if let Some(tol) = ov.target_tol {
        let scheme = obj
            .entry("scheme")
            .or_insert_with(|| Value::Object(Map::new()));
        let m = scheme
            .as_object_mut()
            .ok_or_else(|| HarnessError::Config("scheme must be a JSON object".into()))?;
        set(m, "target_tol", tol.into());
    }
    let cfg: ScenarioConfig = serde_json::from_value(root).map_err(|e| {
        let origin = path.map_or("command line".to_string(), |p| p.display().to_string());
        HarnessError::Config(format!("{origin}: {e}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a config from a JSON string.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, HarnessError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
        HarnessError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_eval_config_is_valid() {
        let cfg = parse_config_str(
            r#"{"scenario":"eval","n":1,"s":0.5,"point":[0,0],"field":"gaussian-bump"}"#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::Eval);
        assert_eq!(cfg.scheme, QuadratureScheme::default());
    }

    #[test]
    fn order_outside_unit_interval_is_rejected() {
        let e = parse_config_str(
            r#"{"scenario":"eval","n":1,"s":1.0,"point":[0,0],"field":"gaussian-bump"}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("s must lie in (0,1)"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_config_str(r#"{"scenario":"liouville","n":1,"s":0.5,"alpha_decay":2}"#)
            .unwrap_err();
        assert!(e.to_string().contains("alpha_decay"), "{e}");
        let e = parse_config_str(r#"{"scenario":"liouville","n":1,"s":0.5,"scheme":{"rmax":1}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("rmax"), "{e}");
    }

    #[test]
    fn missing_fields_are_listed() {
        let e = parse_config_str(r#"{"scenario":"eval","n":1,"s":0.5}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("point") && msg.contains("field"), "{msg}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_config_str("{\n\"scenario\": \"eval\",\n\"n\": }").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"scenario":"solve-ball","n":1,"s":0.5,"problem":{"h":0.125}}"#,
        )
        .unwrap();
        let ov = Overrides {
            s: Some(0.25),
            h: Some(0.25),
            seed: Some(9),
            ..Overrides::default()
        };
        let cfg = parse_config(Some(&path), &ov).unwrap();
        assert_eq!((cfg.s, cfg.problem().h, cfg.seed), (0.25, 0.25, 9));
        let bad = Overrides {
            h: Some(0.3),
            ..Overrides::default()
        };
        assert!(matches!(
            parse_config(Some(&path), &bad),
            Err(HarnessError::Config(_))
        ));
    }
}
