//! Scenario runner for the estimation-entropy toolkit: loads TOML scenarios,
//! runs approximating-set verification, entropy reports and estimator Monte
//! Carlo sweeps, and writes CSV data with pass/fail summaries.

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::HarnessError;
pub use report::{emit_report, num};
pub use run::{run_scenario, Check, Mode, Outcome};
pub use scenario::{load_scenario, parse_seeds, save_scenario, Scenario};

/// Exit status for configuration and I/O errors.
pub const EXIT_CONFIG: i32 = 2;
