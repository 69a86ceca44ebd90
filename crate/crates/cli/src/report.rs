//! Report files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Task;
use crate::error::ErrorObject;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub library_version: String,
    pub scenario_id: String,
    /// Absent when the configuration could not be read.
    pub task: Option<Task>,
    pub seed: Option<u64>,
    /// Tolerances in effect after defaults and overrides.
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
    pub exit_code: i32,
    pub verdicts: BTreeMap<String, String>,
    /// Properties that failed; empty when `pass`.
    pub violations: Vec<String>,
    pub payload: Value,
    pub error: Option<ErrorObject>,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    /// Path as written in the manifest.
    pub path: String,
    pub expected_exit: i32,
    pub matched: bool,
    pub report: RunReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub library_version: String,
    pub suite_id: String,
    pub pass: bool,
    pub exit_code: i32,
    pub scenario_count: usize,
    pub matched_count: usize,
    /// Sorted by scenario id.
    pub results: Vec<SuiteEntry>,
    pub timing: Timing,
}

/// Removes every `timing` member, recursively.
pub fn strip_timing(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Pretty JSON without timing fields, for golden-file comparison.
pub fn golden_json<T: Serialize>(report: &T) -> String {
    let mut value = serde_json::to_value(report).expect("reports serialize");
    strip_timing(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
    text.push('\n');
    text
}
