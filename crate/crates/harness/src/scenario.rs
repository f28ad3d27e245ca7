//! Scenario files: TOML with defaults, validated as a whole.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use estent_core::{step_count, Benchmark, Hyperbox, RateFunction, StabilityClass, StabilityKind, SystemModel};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Integrator step.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub model: ModelSection,
    pub stability: StabilitySection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub entropy: EntropySection,
    #[serde(default)]
    pub estimate: EstimateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub benchmark: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// `K`; the benchmark default when absent.
    pub initial_set: Option<BoxSpec>,
    /// `D`; the benchmark default when absent.
    pub disturbance_set: Option<BoxSpec>,
    /// Overrides the benchmark's constructed contraction bound. Any value at
    /// least the true bound is valid.
    pub mu_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSpec {
    pub fn to_box(&self) -> estent_core::Result<Hyperbox<f64>> {
        Hyperbox::from_bounds(&self.lower, &self.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    /// One of `practical`, `practical-exponential`, `asymptotic`, `exponential`.
    pub kind: String,
    pub alpha: Option<f64>,
    pub epsilon: f64,
    /// `beta(r, t) = beta_scale e^{-beta_decay t} r` for the non-exponential kinds.
    #[serde(default = "one")]
    pub beta_scale: f64,
    /// Defaults to `alpha`.
    pub beta_decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub horizon: f64,
    pub trials: usize,
    /// Disturbance samples are held for this many integrator steps.
    pub hold_steps: usize,
    /// Multiplies the cover radius; values above 1 deliberately break the guarantee.
    pub coarsen: f64,
    /// Stability kinds to verify; the scenario's kind when empty.
    pub kinds: Vec<String>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            trials: 500,
            hold_steps: 10,
            coarsen: 1.0,
            kinds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySection {
    /// Curve accuracies; the stability epsilon when empty.
    pub epsilons: Vec<f64>,
    pub horizons: Vec<f64>,
    pub trace_horizon: f64,
    pub trace_state_density: usize,
    pub trace_disturbance_density: usize,
}

impl Default for EntropySection {
    fn default() -> Self {
        Self {
            epsilons: Vec::new(),
            horizons: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            trace_horizon: 1.0,
            trace_state_density: 5,
            trace_disturbance_density: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSection {
    /// Transmission period `T`.
    pub period: f64,
    pub frames: u32,
    /// Monte Carlo runs per seed.
    pub runs: usize,
    /// Hold time of the random piecewise-constant disturbance.
    pub disturbance_period: f64,
    /// Frames at the end of a run checked against the limiting bound.
    pub tail_window: usize,
    /// Write plant and estimate signals of the first run.
    pub trace: bool,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            period: 1.0,
            frames: 50,
            runs: 1,
            disturbance_period: 0.1,
            tail_window: 10,
            trace: false,
        }
    }
}

fn default_step() -> f64 {
    1e-3
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn one() -> f64 {
    1.0
}

/// Everything a run needs, built from a valid scenario.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub benchmark: Benchmark,
    pub model: SystemModel<f64>,
    pub mu_bar: f64,
    pub stability: StabilityClass<f64>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
            HarnessError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialises")
    }

    /// Every violated constraint, or `Ok` when none.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                problems.push(msg);
            }
        };
        check(!self.name.is_empty(), "name: must not be empty".into());
        check(
            self.step > 0.0 && self.step.is_finite(),
            "step: must be positive".into(),
        );
        check(!self.seeds.is_empty(), "seeds: at least one seed is required".into());

        let bench = Benchmark::from_name(&self.model.benchmark, &self.model.params);
        if let Err(e) = &bench {
            check(false, format!("model: {e}"));
        }
        if let Ok(b) = &bench {
            let n = b.state_dim();
            for (field, spec) in [
                ("model.initial_set", &self.model.initial_set),
                ("model.disturbance_set", &self.model.disturbance_set),
            ] {
                let Some(spec) = spec else { continue };
                check(
                    spec.lower.len() == n && spec.upper.len() == n,
                    format!(
                        "{field}: expected {n} bounds, got {} lower and {} upper",
                        spec.lower.len(),
                        spec.upper.len()
                    ),
                );
                if let Err(e) = spec.to_box() {
                    check(false, format!("{field}: {e}"));
                }
            }
            if let Some(Ok(d)) = self.model.disturbance_set.as_ref().map(BoxSpec::to_box) {
                check(
                    d.dim() != n || d.contains(&vec![0.0; n]),
                    "model.disturbance_set: must contain the origin".into(),
                );
            }
            if let Some(mu) = self.model.mu_bar {
                check(mu.is_finite(), "model.mu_bar: must be finite".into());
            }
        }

        let kind = self.stability.kind.parse::<StabilityKind>();
        check(
            kind.is_ok(),
            format!("stability.kind: unknown kind `{}`", self.stability.kind),
        );
        if let Ok(kind) = kind {
            check(
                !kind.is_exponential() || self.stability.alpha.is_some(),
                format!("stability.alpha: required for kind `{kind}`"),
            );
            check(
                kind.is_exponential() || self.stability.alpha.is_some() || self.stability.beta_decay.is_some(),
                "stability.beta_decay: required when alpha is absent".into(),
            );
        }
        if let Some(a) = self.stability.alpha {
            check(a > 0.0 && a.is_finite(), "stability.alpha: must be positive".into());
        }
        check(
            self.stability.epsilon >= 0.0 && self.stability.epsilon.is_finite(),
            "stability.epsilon: must be non-negative".into(),
        );
        check(
            self.stability.beta_scale >= 1.0,
            "stability.beta_scale: must be at least 1".into(),
        );
        if let Some(b) = self.stability.beta_decay {
            check(
                b > 0.0 && b.is_finite(),
                "stability.beta_decay: must be positive".into(),
            );
        }

        let divides = |h: f64| h > 0.0 && self.step > 0.0 && step_count(h, self.step).is_ok();
        check(
            divides(self.verify.horizon),
            "verify.horizon: must be a positive multiple of step".into(),
        );
        check(self.verify.coarsen > 0.0, "verify.coarsen: must be positive".into());
        for k in &self.verify.kinds {
            check(
                k.parse::<StabilityKind>().is_ok(),
                format!("verify.kinds: unknown kind `{k}`"),
            );
        }
        check(
            self.entropy.epsilons.iter().all(|e| *e > 0.0),
            "entropy.epsilons: must be positive".into(),
        );
        check(
            !self.entropy.horizons.is_empty()
                && self.entropy.horizons.iter().all(|t| *t > 0.0)
                && self.entropy.horizons.windows(2).all(|w| w[1] > w[0]),
            "entropy.horizons: must be positive and strictly increasing".into(),
        );
        check(
            divides(self.entropy.trace_horizon),
            "entropy.trace_horizon: must be a positive multiple of step".into(),
        );
        check(
            self.entropy.trace_state_density >= 1 && self.entropy.trace_disturbance_density >= 1,
            "entropy: trace densities must be at least 1".into(),
        );
        check(
            divides(self.estimate.period),
            "estimate.period: must be a positive multiple of step".into(),
        );
        check(
            self.estimate.disturbance_period > 0.0,
            "estimate.disturbance_period: must be positive".into(),
        );

        if problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid(problems))
        }
    }

    /// Builds the model and stability class.
    pub fn resolve(&self) -> Result<Resolved, HarnessError> {
        self.validate()?;
        let benchmark = Benchmark::from_name(&self.model.benchmark, &self.model.params)?;
        let k = match &self.model.initial_set {
            Some(b) => b.to_box()?,
            None => benchmark.default_initial_set(),
        };
        let d = match &self.model.disturbance_set {
            Some(b) => b.to_box()?,
            None => benchmark.default_disturbance_set(),
        };
        let model = benchmark.build_on(k, d)?;
        let mu_bar = self.model.mu_bar.unwrap_or_else(|| benchmark.mu_bar());
        let stability = self.stability_class(self.stability.kind.parse().expect("validated"))?;
        Ok(Resolved {
            benchmark,
            model,
            mu_bar,
            stability,
        })
    }

    /// Stability class of `kind` with this scenario's constants.
    pub fn stability_class(&self, kind: StabilityKind) -> Result<StabilityClass<f64>, HarnessError> {
        let s = &self.stability;
        let beta = match s.beta_decay.or(s.alpha) {
            Some(decay) if !kind.is_exponential() => Some(RateFunction::new(s.beta_scale, decay)?),
            _ => None,
        };
        Ok(StabilityClass::new(kind, beta, s.alpha, s.epsilon)?)
    }

    /// Kinds covered by verification runs.
    pub fn verify_kinds(&self) -> Vec<StabilityKind> {
        if self.verify.kinds.is_empty() {
            vec![self.stability.kind.parse().expect("validated")]
        } else {
            self.verify
                .kinds
                .iter()
                .map(|k| k.parse().expect("validated"))
                .collect()
        }
    }

    pub fn entropy_epsilons(&self) -> Vec<f64> {
        if self.entropy.epsilons.is_empty() {
            vec![self.stability.epsilon]
        } else {
            self.entropy.epsilons.clone()
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_toml(&text)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, scenario.to_toml()).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `"3"`, `"0,4,9"`, `"0..10"` or `"0..=9"` (and comma-separated mixes).
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Invalid(vec![format!("seed: cannot parse `{spec}`")]);
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..=") {
            let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            seeds.extend(a..=b);
        } else if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "minimal"

[model]
benchmark = "scalar-contracting"

[stability]
kind = "practical-exponential"
alpha = 0.9
epsilon = 0.1
"#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.step, 1e-3);
        assert_eq!(s.seeds, vec![0]);
        assert_eq!(s.estimate.frames, 50);
        let r = s.resolve().unwrap();
        assert_eq!(r.mu_bar, -1.0);
        assert_eq!(r.model.state_dim(), 1);
    }

    #[test]
    fn missing_alpha_names_the_field() {
        let text = MINIMAL
            .replace("kind = \"practical-exponential\"", "kind = \"exponential\"")
            .replace("alpha = 0.9\n", "");
        match Scenario::from_toml(&text) {
            Err(HarnessError::Invalid(problems)) => {
                assert!(
                    problems.iter().any(|p| p.starts_with("stability.alpha")),
                    "{problems:?}"
                )
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_problems_are_reported() {
        let text = format!(
            "seeds = []\n{}",
            MINIMAL
                .replace("scalar-contracting", "lorenz")
                .replace("epsilon = 0.1", "epsilon = -1.0")
        );
        match Scenario::from_toml(&text) {
            Err(HarnessError::Invalid(problems)) => assert_eq!(problems.len(), 3, "{problems:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "name = \"x\"\n[model]\nbenchmark = 3\n";
        match Scenario::from_toml(text) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = MINIMAL.replace(
            "benchmark = \"scalar-contracting\"",
            "benchmark = \"scalar-contracting\"\ninitial_set = { lower = [-1.0, -1.0], upper = [1.0, 1.0] }",
        );
        assert!(matches!(Scenario::from_toml(&text), Err(HarnessError::Invalid(_))));
    }

    #[test]
    fn round_trip() {
        let mut s = Scenario::from_toml(MINIMAL).unwrap();
        s.model.params.insert("a".into(), 2.0);
        s.model.initial_set = Some(BoxSpec {
            lower: vec![-0.5],
            upper: vec![0.25],
        });
        s.entropy.epsilons = vec![0.1, 0.05];
        s.verify.kinds = vec!["asymptotic".into()];
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("0,4, 9").unwrap(), vec![0, 4, 9]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("1..=3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }
}
