//! Manifests of scenarios run as one suite.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::report::{SuiteEntry, SuiteReport, Timing, EXIT_PASS, EXIT_VIOLATION};
use crate::runner;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Scenario file, relative to the manifest.
    pub path: String,
    #[serde(default)]
    pub expect_exit: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub suite_id: String,
    pub scenarios: Vec<ManifestEntry>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Overrides applied to every scenario before it runs.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// `name=value` pairs.
    pub tolerances: Vec<String>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) -> Result<(), CliError> {
        if let Some(seed) = self.seed {
            config.seed = Some(seed);
        }
        for spec in &self.tolerances {
            config.override_tolerance(spec)?;
        }
        Ok(())
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", manifest.schema_version)));
        }
        if let Some(bad) = manifest.scenarios.iter().find(|s| !(0..=2).contains(&s.expect_exit)) {
            return Err(CliError::Config(format!("{}: expect_exit must be 0, 1 or 2", bad.path)));
        }
        Ok(manifest)
    }
}

fn load_scenario(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let mut config = ScenarioConfig::load(path)?;
    overrides.apply(&mut config)?;
    config.validate()?;
    Ok(config)
}

/// Runs every scenario of the manifest, in parallel, and aggregates the
/// reports sorted by scenario id.
pub fn run_suite(manifest_path: &Path, overrides: &Overrides) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let manifest = Manifest::load(manifest_path)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut results: Vec<SuiteEntry> = manifest
        .scenarios
        .par_iter()
        .map(|entry| {
            let path = dir.join(&entry.path);
            let report = match load_scenario(&path, overrides) {
                Ok(config) => runner::run(&config),
                Err(e) => {
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    runner::invalid(&stem, None, &e)
                }
            };
            SuiteEntry {
                path: entry.path.clone(),
                expected_exit: entry.expect_exit,
                matched: report.exit_code == entry.expect_exit,
                report,
            }
        })
        .collect();
    results.sort_by(|a, b| (&a.report.scenario_id, &a.path).cmp(&(&b.report.scenario_id, &b.path)));
    let mut seen = BTreeSet::new();
    if let Some(dup) = results.iter().find(|r| !seen.insert(&r.report.scenario_id)) {
        return Err(CliError::Config(format!("duplicate scenario_id `{}`", dup.report.scenario_id)));
    }
    let matched_count = results.iter().filter(|r| r.matched).count();
    let pass = matched_count == results.len();
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        library_version: rkhs_purity::VERSION.to_string(),
        suite_id: manifest.suite_id,
        pass,
        exit_code: if pass { EXIT_PASS } else { EXIT_VIOLATION },
        scenario_count: results.len(),
        matched_count,
        results,
        timing: Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    })
}

/// One CSV row per scenario.
pub fn write_summary_csv<W: std::io::Write>(report: &SuiteReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["scenario_id", "task", "path", "exit_code", "expected_exit", "matched", "pass"]).map_err(io)?;
    for r in &report.results {
        let task = r.report.task.map(|t| t.name()).unwrap_or("");
        w.write_record([
            r.report.scenario_id.as_str(),
            task,
            r.path.as_str(),
            &r.report.exit_code.to_string(),
            &r.expected_exit.to_string(),
            &r.matched.to_string(),
            &r.report.pass.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
