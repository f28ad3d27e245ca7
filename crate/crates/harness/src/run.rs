//! Executes a scenario in one of the run modes.

use std::fmt;
use std::str::FromStr;

use estent_core::{
    bits_for_frame, build_approx_set, entropy_report, grid_cover, run_estimation_with, trace_infimum, trial_seed,
    verify_approximating, DisturbanceMode, DisturbancePolicy, DisturbanceSignal, EntropyReport, EstimatorConfig,
    RunLog, RunOptions, StabilityKind, TraceInfimum, TraceSampling, VerificationReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HarnessError;
use crate::scenario::{Resolved, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyApprox,
    Entropy,
    Estimate,
    All,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::VerifyApprox => "verify-approx",
            Mode::Entropy => "entropy",
            Mode::Estimate => "estimate",
            Mode::All => "all",
        }
    }

    fn includes(self, other: Mode) -> bool {
        self == Mode::All || self == other
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verify-approx" => Ok(Mode::VerifyApprox),
            "entropy" => Ok(Mode::Entropy),
            "estimate" => Ok(Mode::Estimate),
            "all" => Ok(Mode::All),
            _ => Err(HarnessError::Invalid(vec![format!("mode: unknown mode `{s}`")])),
        }
    }
}

/// One named property and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyResult {
    pub seed: u64,
    pub kind: StabilityKind,
    pub delta: f64,
    pub cardinality: u64,
    pub report: VerificationReport<f64>,
}

#[derive(Debug, Clone)]
pub struct EntropyResult {
    pub trace: TraceInfimum<f64>,
    pub reports: Vec<EntropyReport<f64>>,
}

#[derive(Debug, Clone)]
pub struct EstimateRun {
    pub run_id: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub log: RunLog<f64>,
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub config: EstimatorConfig<f64>,
    pub runs: Vec<EstimateRun>,
}

/// Everything a scenario run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: Scenario,
    pub mode: Mode,
    pub mu_bar: f64,
    pub verify: Option<Vec<VerifyResult>>,
    pub entropy: Option<EntropyResult>,
    pub estimate: Option<EstimateResult>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

pub fn run_scenario(scenario: &Scenario, mode: Mode) -> Result<Outcome, HarnessError> {
    let resolved = scenario.resolve()?;
    let mut checks = Vec::new();
    let verify = if mode.includes(Mode::VerifyApprox) {
        let v = run_verify(scenario, &resolved)?;
        checks.extend(verify_checks(&v));
        Some(v)
    } else {
        None
    };
    let entropy = if mode.includes(Mode::Entropy) {
        let e = run_entropy(scenario, &resolved)?;
        checks.extend(entropy_checks(&e));
        Some(e)
    } else {
        None
    };
    let estimate = if mode.includes(Mode::Estimate) {
        let e = run_estimate(scenario, &resolved)?;
        checks.extend(estimate_checks(scenario, &e));
        Some(e)
    } else {
        None
    };
    Ok(Outcome {
        scenario: scenario.clone(),
        mode,
        mu_bar: resolved.mu_bar,
        verify,
        entropy,
        estimate,
        checks,
    })
}

pub fn run_verify(scenario: &Scenario, resolved: &Resolved) -> Result<Vec<VerifyResult>, HarnessError> {
    let jobs: Vec<(u64, StabilityKind)> = scenario
        .seeds
        .iter()
        .flat_map(|&s| scenario.verify_kinds().into_iter().map(move |k| (s, k)))
        .collect();
    let policy = DisturbancePolicy {
        step: scenario.step,
        mode: DisturbanceMode::Uniform {
            hold_steps: scenario.verify.hold_steps,
        },
    };
    jobs.par_iter()
        .map(|&(seed, kind)| {
            let class = scenario.stability_class(kind)?;
            let mut aset = build_approx_set(&resolved.model, class, resolved.mu_bar, scenario.verify.horizon)?;
            let delta = aset.formula.delta * scenario.verify.coarsen;
            if scenario.verify.coarsen != 1.0 {
                aset.cover = grid_cover(resolved.model.initial_set(), delta)?;
            }
            let report = verify_approximating(&resolved.model, &aset, scenario.verify.trials, &policy, seed)?;
            Ok(VerifyResult {
                seed,
                kind,
                delta,
                cardinality: aset.cardinality(),
                report,
            })
        })
        .collect()
}

fn verify_checks(results: &[VerifyResult]) -> Vec<Check> {
    let mut kinds: Vec<StabilityKind> = Vec::new();
    for r in results {
        if !kinds.contains(&r.kind) {
            kinds.push(r.kind);
        }
    }
    kinds
        .into_iter()
        .map(|kind| {
            let of_kind: Vec<_> = results.iter().filter(|r| r.kind == kind).collect();
            let trials: usize = of_kind.iter().map(|r| r.report.trials.len()).sum();
            let violations: usize = of_kind.iter().map(|r| r.report.violations).sum();
            let worst = of_kind
                .iter()
                .map(|r| r.report.worst_margin)
                .fold(f64::NEG_INFINITY, f64::max);
            Check::new(
                format!("verify.{kind}"),
                violations == 0,
                format!(
                    "{violations} of {trials} trials violate `{}` (worst margin {worst:.3e})",
                    kind.conclusion()
                ),
            )
        })
        .collect()
}

pub fn run_entropy(scenario: &Scenario, resolved: &Resolved) -> Result<EntropyResult, HarnessError> {
    let sampling = TraceSampling::new(
        scenario.entropy.trace_state_density,
        scenario.entropy.trace_disturbance_density,
        scenario.step,
    );
    let trace = trace_infimum(&resolved.model, scenario.entropy.trace_horizon, &sampling)?;
    let kinds: Vec<StabilityKind> = StabilityKind::ALL
        .into_iter()
        .filter(|k| !k.is_exponential() || scenario.stability.alpha.is_some())
        .collect();
    let epsilons = scenario.entropy_epsilons();
    let reports = kinds
        .par_iter()
        .map(|&kind| {
            let class = scenario.stability_class(kind)?;
            Ok(entropy_report(
                &resolved.model,
                &class,
                resolved.mu_bar,
                trace.value,
                &epsilons,
                &scenario.entropy.horizons,
            )?)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(EntropyResult { trace, reports })
}

fn entropy_checks(result: &EntropyResult) -> Vec<Check> {
    result
        .reports
        .iter()
        .map(|r| {
            let truncated = r.curves.iter().any(|c| c.truncated);
            Check::new(
                format!("entropy.{}.bounds", r.case),
                r.consistent(),
                format!(
                    "lower {:.6} <= upper {:.6} nats/time{}",
                    r.lower,
                    r.upper,
                    if truncated {
                        " (curve truncated at cardinality cap)"
                    } else {
                        ""
                    }
                ),
            )
        })
        .collect()
}

pub fn estimator_config(scenario: &Scenario, resolved: &Resolved) -> Result<EstimatorConfig<f64>, HarnessError> {
    let alpha = scenario
        .stability
        .alpha
        .ok_or_else(|| HarnessError::Invalid(vec!["stability.alpha: required for estimate mode".into()]))?;
    Ok(EstimatorConfig::new(
        alpha,
        scenario.stability.epsilon,
        scenario.estimate.period,
        resolved.mu_bar,
        resolved.model.initial_set().clone(),
        scenario.step,
    )?)
}

pub fn run_estimate(scenario: &Scenario, resolved: &Resolved) -> Result<EstimateResult, HarnessError> {
    let config = estimator_config(scenario, resolved)?;
    let jobs: Vec<(u64, u64)> = scenario
        .seeds
        .iter()
        .flat_map(|&s| (0..scenario.estimate.runs as u64).map(move |r| (s, r)))
        .collect();
    let horizon = config.period * scenario.estimate.frames as f64;
    let runs = jobs
        .par_iter()
        .enumerate()
        .map(|(run_id, &(seed, r))| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, r));
            let model = &resolved.model;
            let x0 = model.initial_set().sample(&mut rng);
            let d = if model.dist_dim() == 0 {
                DisturbanceSignal::zero(0)
            } else {
                DisturbanceSignal::random(
                    model.disturbance_set(),
                    scenario.estimate.disturbance_period,
                    horizon,
                    &mut rng,
                )?
            };
            let options = RunOptions {
                keep_signals: scenario.estimate.trace && run_id == 0,
            };
            let log = run_estimation_with(model, &config, &x0, &d, scenario.estimate.frames, options)?;
            Ok(EstimateRun { run_id, seed, x0, log })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(EstimateResult { config, runs })
}

fn estimate_checks(scenario: &Scenario, result: &EstimateResult) -> Vec<Check> {
    let frames: usize = result.runs.iter().map(|r| r.log.frames.len()).sum();
    let outside: usize = result.runs.iter().map(|r| r.log.containment_violations).sum();
    let over: usize = result.runs.iter().map(|r| r.log.bound_violations).sum();
    let worst_slack = result
        .runs
        .iter()
        .flat_map(|r| r.log.frames.iter().map(|f| f.bound_slack))
        .fold(f64::NEG_INFINITY, f64::max);
    let bits_ok = result
        .runs
        .iter()
        .flat_map(|r| &r.log.frames)
        .all(|f| bits_for_frame(f.cardinality).ok() == Some(f.bits));
    let window = scenario.estimate.tail_window;
    let tail = if window > 0 && scenario.estimate.frames as usize >= window {
        let failing = result
            .runs
            .iter()
            .filter(|r| r.log.tail_within_asymptotic_bound(window) != Some(true))
            .count();
        let bound = result.runs.first().map(|r| r.log.asymptotic_bound).unwrap_or(f64::NAN);
        Check::new(
            "estimate.tail-bound",
            failing == 0,
            format!(
                "{failing} of {} runs exceed {bound:.6} over the last {window} frames",
                result.runs.len()
            ),
        )
    } else {
        Check::new(
            "estimate.tail-bound",
            true,
            "not applicable: fewer frames than the tail window",
        )
    };
    vec![
        Check::new(
            "estimate.containment",
            outside == 0,
            format!("{outside} of {frames} measurements outside the frame's uncertainty box"),
        ),
        Check::new(
            "estimate.error-bound",
            over == 0,
            format!("{over} of {frames} frames exceed the error bound (worst slack {worst_slack:.3e})"),
        ),
        tail,
        Check::new("estimate.bits", bits_ok, "bits column equals ceil(log2 N_k)"),
    ]
}
