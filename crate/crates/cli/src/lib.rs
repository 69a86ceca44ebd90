//! Scenario runner for `rkhs-purity`: reads JSON scenario files, runs the
//! named task and writes a JSON report. Exit codes: 0 when every property
//! holds, 1 when one is violated, 2 on invalid input.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod suite;

pub use config::{ScenarioConfig, Task};
pub use error::CliError;
pub use report::{RunReport, SuiteReport};
pub use suite::{run_suite, Overrides};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RKHS_PURITY_OUT_DIR";
