use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use estent_harness::{emit_report, load_scenario, parse_seeds, run_scenario, HarnessError, Mode, EXIT_CONFIG};

/// Run an estimation-entropy scenario.
///
/// Every flag can also be set through the environment variable shown in
/// brackets; flags override scenario fields.
#[derive(Debug, Parser)]
#[command(name = "estent", version)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, env = "ESTENT_SCENARIO")]
    scenario: PathBuf,

    #[arg(long, value_enum, default_value = "all", env = "ESTENT_MODE")]
    mode: Mode,

    /// Output directory; defaults to the scenario's `out`.
    #[arg(long, env = "ESTENT_OUT")]
    out: Option<PathBuf>,

    /// Seeds: `3`, `0,4,9`, `0..10` or `0..=9`.
    #[arg(long, env = "ESTENT_SEED")]
    seed: Option<String>,

    /// Frames per estimation run.
    #[arg(long, env = "ESTENT_FRAMES")]
    frames: Option<u32>,

    /// Integrator step.
    #[arg(long, env = "ESTENT_STEP")]
    step: Option<f64>,
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    let mut scenario = load_scenario(&cli.scenario)?;
    if let Some(seeds) = &cli.seed {
        scenario.seeds = parse_seeds(seeds)?;
    }
    if let Some(frames) = cli.frames {
        scenario.estimate.frames = frames;
    }
    if let Some(step) = cli.step {
        scenario.step = step;
    }
    if let Some(out) = &cli.out {
        scenario.out = out.clone();
    }
    scenario.validate()?;
    let outcome = run_scenario(&scenario, cli.mode)?;
    emit_report(&outcome, &scenario.out)?;
    for c in &outcome.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("outputs in {}", scenario.out.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
