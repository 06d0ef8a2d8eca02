//! Run summaries and artifact formatting. Everything written to stdout or
//! to files is a pure function of config and seed; timing goes to stderr.

use serde::Serialize;

/// Outcome counts and artifact paths for one command run. `failed` drives
/// the exit status; `flagged` records findings that are reported but do
/// not fail the run (inadmissible draws, published-form notes, bound
/// mismatches traced to the reference forms).
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub checks_run: u64,
    pub passed: u64,
    pub failed: u64,
    pub flagged: u64,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub detail: serde_json::Value,
}

impl RunSummary {
    pub fn new(command: &'static str) -> Self {
        RunSummary {
            command,
            checks_run: 0,
            passed: 0,
            failed: 0,
            flagged: 0,
            artifacts: Vec::new(),
            detail: serde_json::Value::Null,
        }
    }
}

pub fn emit(summary: &RunSummary, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(summary).expect("summary serializes")
        );
    } else {
        println!(
            "{}: {} checks, {} passed, {} failed, {} flagged",
            summary.command, summary.checks_run, summary.passed, summary.failed, summary.flagged
        );
        if !summary.artifacts.is_empty() {
            println!("artifacts: {}", summary.artifacts.join(", "));
        }
    }
}

/// Scientific notation with 17 significant digits, the CSV real format.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

pub fn fmt_bool(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}
