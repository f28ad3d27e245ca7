//! CSV and summary emission. Column meanings are listed in `docs/output-schema.md`.

use std::fs;
use std::path::{Path, PathBuf};

use csv::Writer;
use estent_core::nats_to_bits;
use serde::Serialize;

use crate::error::HarnessError;
use crate::run::{Check, EntropyResult, EstimateResult, Outcome, VerifyResult};
use crate::scenario::Scenario;

pub const TOOL: &str = "estent";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}_{i}"))
}

pub const VERIFY_COLUMNS: &[&str] = &[
    "seed",
    "kind",
    "trial",
    "trial_seed",
    "delta",
    "cardinality",
    "cover_index",
    "x0_<i>",
    "worst_margin",
    "tolerance",
    "violated",
];

pub const ENTROPY_COLUMNS: &[&str] = &[
    "kind",
    "epsilon",
    "horizon",
    "cardinality",
    "rate_nats",
    "rate_bits",
    "upper_bound",
    "lower_bound",
    "trace_inf",
    "mu_bar",
];

pub const RUNLOG_COLUMNS: &[&str] = &[
    "run_id",
    "seed",
    "k",
    "t_start",
    "delta_k",
    "N_k",
    "bits",
    "cum_bits",
    "quant_err",
    "frame_max_err",
    "error_bound",
    "bound_slack",
    "contained",
    "violation_flag",
];

pub const TRACE_COLUMNS: &[&str] = &["run_id", "t", "x_<i>", "nu_<i>", "err"];

fn write_verify(path: &Path, results: &[VerifyResult], n: usize) -> Result<(), HarnessError> {
    let mut w = Writer::from_path(path)?;
    let mut header: Vec<String> = VERIFY_COLUMNS[..7].iter().map(|s| s.to_string()).collect();
    header.extend(indexed("x0", n));
    header.extend(VERIFY_COLUMNS[8..].iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for r in results {
        for t in &r.report.trials {
            let mut row = vec![
                r.seed.to_string(),
                r.kind.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                num(r.delta),
                r.cardinality.to_string(),
                t.cover_index.to_string(),
            ];
            row.extend(t.x0.iter().map(|v| num(*v)));
            row.extend([
                num(t.worst_margin),
                num(r.report.tolerance),
                (t.violated as u8).to_string(),
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(io(path))
}

fn write_entropy(path: &Path, result: &EntropyResult) -> Result<(), HarnessError> {
    let mut w = Writer::from_path(path)?;
    w.write_record(ENTROPY_COLUMNS)?;
    for r in &result.reports {
        for c in &r.curves {
            for p in &c.points {
                w.write_record([
                    r.case.to_string(),
                    num(c.epsilon),
                    num(p.horizon),
                    p.cardinality.to_string(),
                    num(p.rate),
                    num(nats_to_bits(p.rate)),
                    num(r.upper),
                    num(r.lower),
                    num(r.trace_inf),
                    num(r.mu_bar),
                ])?;
            }
        }
    }
    w.flush().map_err(io(path))
}

fn write_runlog(path: &Path, result: &EstimateResult) -> Result<(), HarnessError> {
    let mut w = Writer::from_path(path)?;
    w.write_record(RUNLOG_COLUMNS)?;
    for run in &result.runs {
        for f in &run.log.frames {
            w.write_record([
                run.run_id.to_string(),
                run.seed.to_string(),
                f.k.to_string(),
                num(f.t_start),
                num(f.delta),
                f.cardinality.to_string(),
                f.bits.to_string(),
                f.cumulative_bits.to_string(),
                num(f.quantization_error),
                num(f.max_error),
                num(f.bound_at_start),
                num(f.bound_slack),
                (f.contained as u8).to_string(),
                (f.violation as u8).to_string(),
            ])?;
        }
    }
    w.flush().map_err(io(path))
}

fn write_trace(path: &Path, result: &EstimateResult, n: usize) -> Result<bool, HarnessError> {
    let Some((run, sig)) = result.runs.iter().find_map(|r| r.log.signals.as_ref().map(|s| (r, s))) else {
        return Ok(false);
    };
    let mut w = Writer::from_path(path)?;
    let mut header = vec!["run_id".to_string(), "t".to_string()];
    header.extend(indexed("x", n));
    header.extend(indexed("nu", n));
    header.push("err".into());
    w.write_record(&header)?;
    for ((t, x), nu) in sig.times.iter().zip(&sig.plant).zip(&sig.estimate) {
        let mut row = vec![run.run_id.to_string(), num(*t)];
        row.extend(x.iter().map(|v| num(*v)));
        row.extend(nu.iter().map(|v| num(*v)));
        let err = x.iter().zip(nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        row.push(num(err));
        w.write_record(&row)?;
    }
    w.flush().map_err(io(path))?;
    Ok(true)
}

#[derive(Serialize)]
struct BoundsJson {
    kind: String,
    upper: f64,
    lower: f64,
    upper_bits: f64,
    consistent: bool,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'a str,
    passed: bool,
    mu_bar: f64,
    checks: &'a [Check],
    files: Vec<String>,
    entropy_bounds: Vec<BoundsJson>,
    trace_inf: Option<f64>,
    scenario: &'a Scenario,
}

fn summary_text(outcome: &Outcome, files: &[String]) -> String {
    let mut s = format!(
        "{TOOL} {VERSION}\nscenario: {}\nmode: {}\nbenchmark: {}\nmu_bar: {}\n",
        outcome.scenario.name,
        outcome.mode,
        outcome.scenario.model.benchmark,
        num(outcome.mu_bar)
    );
    if let Some(e) = &outcome.entropy {
        for r in &e.reports {
            s += &format!(
                "entropy {}: lower {} upper {} (nats/time)\n",
                r.case,
                num(r.lower),
                num(r.upper)
            );
        }
    }
    if let Some(e) = &outcome.estimate {
        let bits: u64 = e.runs.iter().map(|r| r.log.total_bits).sum();
        s += &format!(
            "estimate: {} runs x {} frames, d0 {}, limit bound {}, total bits {bits}\n",
            e.runs.len(),
            outcome.scenario.estimate.frames,
            num(e.config.d0()),
            num(estent_core::asymptotic_bound(&e.config)),
        );
    }
    for c in &outcome.checks {
        s += &format!(
            "[{}] {}: {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    s += &format!("files: {}\n", files.join(", "));
    s += &format!("result: {}\n", if outcome.passed() { "PASS" } else { "FAIL" });
    s
}

/// Writes every output of `outcome` into `dir` and returns the paths written.
pub fn emit_report(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let n = outcome.scenario.resolve().map(|r| r.model.state_dim()).unwrap_or(0);
    if let Some(v) = &outcome.verify {
        let p = dir.join("verify_approx.csv");
        write_verify(&p, v, n)?;
        written.push(p);
    }
    if let Some(e) = &outcome.entropy {
        let p = dir.join("entropy_curve.csv");
        write_entropy(&p, e)?;
        written.push(p);
    }
    if let Some(e) = &outcome.estimate {
        if outcome.scenario.estimate.frames > 0 {
            let p = dir.join("runlog.csv");
            write_runlog(&p, e)?;
            written.push(p);
            let p = dir.join("trace.csv");
            if write_trace(&p, e, n)? {
                written.push(p);
            }
        }
    }
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();

    let text_path = dir.join("summary.txt");
    fs::write(&text_path, summary_text(outcome, &names)).map_err(io(&text_path))?;

    let json = SummaryJson {
        tool: TOOL,
        version: VERSION,
        mode: outcome.mode.as_str(),
        passed: outcome.passed(),
        mu_bar: outcome.mu_bar,
        checks: &outcome.checks,
        files: names,
        entropy_bounds: outcome
            .entropy
            .iter()
            .flat_map(|e| &e.reports)
            .map(|r| BoundsJson {
                kind: r.case.to_string(),
                upper: r.upper,
                lower: r.lower,
                upper_bits: nats_to_bits(r.upper),
                consistent: r.consistent(),
            })
            .collect(),
        trace_inf: outcome.entropy.as_ref().map(|e| e.trace.value),
        scenario: &outcome.scenario,
    };
    let json_path = dir.join("summary.json");
    let body = serde_json::to_string_pretty(&json).expect("summary serialises");
    fs::write(&json_path, body + "\n").map_err(io(&json_path))?;

    written.push(text_path);
    written.push(json_path);
    Ok(written)
}
