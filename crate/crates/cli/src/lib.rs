//! Scenario runner for the acmcf phase-field laboratory: JSON scenario files,
//! the check registry, report files and the command-line entry point.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use config::{ConfigError, ScenarioConfig};
pub use run::{RunOptions, Runner};

/// Process exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Every ordinary check passed and every must-detect check detected.
    Pass = 0,
    CheckFailure = 1,
    /// Invalid configuration or an I/O failure.
    ConfigOrIo = 2,
}

/// Loads, validates and runs `verify`; returns the report status.
pub fn verify(config: &Path, opts: &RunOptions) -> Result<(Status, acmcf_core::VerificationReport)> {
    let cfg = ScenarioConfig::load(config)?;
    let runner = Runner::new(cfg, opts)?;
    let report = runner.verify()?;
    let status = if report.all_pass() {
        Status::Pass
    } else {
        Status::CheckFailure
    };
    Ok((status, report))
}

/// Summary text of an existing CSV and whether every row passed.
pub fn summarize(csv: &Path) -> Result<(String, bool)> {
    let text = std::fs::read_to_string(csv).with_context(|| format!("cannot read {}", csv.display()))?;
    let rows = report::parse_csv(&text).with_context(|| format!("malformed report {}", csv.display()))?;
    let ok = rows.iter().all(|r| r.pass);
    Ok((report::summary(&rows), ok))
}

/// `report.csv` inside an output directory.
pub fn report_path(out: &Path) -> PathBuf {
    out.join("report.csv")
}
