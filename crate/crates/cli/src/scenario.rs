//! Strict JSON scenario files.

use std::fs;
use std::path::Path;

use purposedyn::analytics::Parameter;
use purposedyn::{FirmParams, ModelError, TalentDistribution, WorkerParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Model parameters as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub alpha: f64,
    pub beta: f64,
    pub a_e: f64,
    pub a_k: f64,
    pub delta: f64,
    pub lambda: f64,
    pub c: f64,
    pub distribution: TalentDistribution,
}

/// Grid dynamic-programming check of the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpSpec {
    pub grid: usize,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticsSpec {
    #[serde(default)]
    pub parameters: Vec<Parameter>,
    #[serde(default)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadSpec {
    pub gammas: Vec<f64>,
    /// Also search cost parameters for opposite profit responses (power-1
    /// baselines only).
    #[serde(default)]
    pub profit_search: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub shifts: Vec<f64>,
}

/// A complete scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub params: ParamsSpec,
    #[serde(default)]
    pub initial_meaning: f64,
    pub horizon: usize,
    /// Reject distributions that violate condition A3 (only point masses
    /// satisfy it).
    #[serde(default)]
    pub require_a3: bool,
    /// Ability at which utilities are reported; defaults to the mean.
    #[serde(default)]
    pub reference_ability: Option<f64>,
    #[serde(default)]
    pub dp: Option<DpSpec>,
    #[serde(default)]
    pub comparative_statics: Option<StaticsSpec>,
    #[serde(default)]
    pub spread: Option<SpreadSpec>,
    #[serde(default)]
    pub shift: Option<ShiftSpec>,
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub params: FirmParams,
    /// Lower-case hex SHA-256 of the file bytes.
    pub sha256: String,
}

impl Scenario {
    pub fn reference_ability(&self) -> f64 {
        self.file
            .reference_ability
            .unwrap_or(self.params.moments().m1)
    }
}

fn validation(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

fn from_model(prefix: &str, e: ModelError) -> CliError {
    match e {
        ModelError::Invalid { field, reason } => validation(format!("{prefix}.{field}"), reason),
        other => validation(prefix, other.to_string()),
    }
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        validation(
            if path == "." {
                "(root)".to_string()
            } else {
                path
            },
            e.into_inner().to_string(),
        )
    })?;
    let sha256 = format!("{:x}", Sha256::digest(text.as_bytes()));
    let params = validate(&file)?;
    Ok(Scenario {
        file,
        params,
        sha256,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read scenario {}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn validate(file: &ScenarioFile) -> Result<FirmParams, CliError> {
    let p = &file.params;
    let worker =
        WorkerParams::new(p.alpha, p.beta, p.a_e, p.a_k).map_err(|e| from_model("params", e))?;
    let fp = FirmParams::new(worker, p.delta, p.lambda, p.c, p.distribution.clone())
        .map_err(|e| from_model("params", e))?;
    if file.require_a3 {
        fp.moments()
            .check_condition_a3()
            .map_err(|e| validation("params.distribution", e.to_string()))?;
    }
    if !(file.initial_meaning.is_finite() && file.initial_meaning >= 0.0) {
        return Err(validation("initial_meaning", "must be finite and >= 0"));
    }
    if file.horizon == 0 {
        return Err(validation("horizon", "must be >= 1"));
    }
    if let Some(b) = file.reference_ability {
        if !(b.is_finite() && b > 0.0) {
            return Err(validation("reference_ability", "must be finite and > 0"));
        }
    }
    if let Some(dp) = &file.dp {
        if dp.grid < 3 {
            return Err(validation("dp.grid", "must be >= 3"));
        }
    }
    if let Some(Some(step)) = file.comparative_statics.as_ref().map(|s| s.step) {
        if !(step.is_finite() && step > 0.0) {
            return Err(validation(
                "comparative_statics.step",
                "must be finite and > 0",
            ));
        }
    }
    if let Some(s) = &file.spread {
        if let Some(i) = s.gammas.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(validation(
                format!("spread.gammas[{i}]"),
                "must be finite and >= 0",
            ));
        }
    }
    if let Some(s) = &file.shift {
        if let Some(i) = s.shifts.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(validation(
                format!("shift.shifts[{i}]"),
                "must be finite and >= 0",
            ));
        }
    }
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S0: &str = r#"{
        "name": "S0",
        "params": {
            "alpha": 0.5, "beta": 0.5, "a_e": 1.0, "a_k": 1.0,
            "delta": 0.5, "lambda": 0.5, "c": 1.0,
            "distribution": {"empirical": {"support": [1.0], "weights": [1.0]}}
        },
        "horizon": 10
    }"#;

    fn err_path(text: &str) -> (String, String) {
        match parse_scenario(text) {
            Err(CliError::Validation { path, message }) => (path, message),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn s0_loads() {
        let sc = parse_scenario(S0).unwrap();
        assert_eq!(sc.params, FirmParams::s0());
        assert_eq!(sc.reference_ability(), 1.0);
        assert_eq!(sc.sha256.len(), 64);
    }

    #[test]
    fn distribution_literals() {
        let ln = S0.replace(
            r#"{"empirical": {"support": [1.0], "weights": [1.0]}}"#,
            r#"{"lognormal": {"mu": 0.0, "sigma2": 0.25, "power": 2.0}}"#,
        );
        let sc = parse_scenario(&ln).unwrap();
        assert_eq!(sc.params.dist.as_lognormal().unwrap().power, 2.0);
        let default_power = ln.replace(r#", "power": 2.0"#, "");
        let sc = parse_scenario(&default_power).unwrap();
        assert_eq!(sc.params.dist.as_lognormal().unwrap().power, 1.0);
    }

    #[test]
    fn errors_name_the_field() {
        let (path, msg) = err_path(&S0.replace(r#""alpha": 0.5"#, r#""alpha": 1.2"#));
        assert_eq!(path, "params.alpha");
        assert!(msg.contains("(0, 1)"), "{msg}");

        let bad_weights = S0.replace(
            r#""support": [1.0], "weights": [1.0]"#,
            r#""support": [1.0, 2.0], "weights": [0.5, 0.4]"#,
        );
        let (path, msg) = err_path(&bad_weights);
        assert!(path.starts_with("params.distribution"), "{path}");
        assert!(msg.contains("weights") && msg.contains("sum to 1"), "{msg}");

        let (path, msg) =
            err_path(&S0.replace(r#""horizon": 10"#, r#""horizon": 10, "colour": 1"#));
        assert_eq!(path, "colour");
        assert!(msg.contains("unknown field"), "{msg}");

        let (path, _) = err_path(&S0.replace(r#""lambda": 0.5"#, r#""lambda": 0.5, "gamma": 1"#));
        assert_eq!(path, "params.gamma");

        let (path, msg) = err_path(&S0.replace(r#""delta": 0.5"#, r#""delta": 1.5"#));
        assert_eq!(path, "params.delta");
        assert!(msg.contains("(0, 1)"));
    }

    #[test]
    fn a3_is_opt_in() {
        let spread = S0.replace(
            r#""support": [1.0], "weights": [1.0]"#,
            r#""support": [1.0, 2.0], "weights": [0.5, 0.5]"#,
        );
        assert!(parse_scenario(&spread).is_ok());
        let strict = spread.replace(r#""horizon": 10"#, r#""horizon": 10, "require_a3": true"#);
        let (path, msg) = err_path(&strict);
        assert_eq!(path, "params.distribution");
        assert!(msg.contains("condition A3 violated"), "{msg}");
        let point = S0.replace(r#""horizon": 10"#, r#""horizon": 10, "require_a3": true"#);
        assert!(parse_scenario(&point).is_ok());
    }
}
