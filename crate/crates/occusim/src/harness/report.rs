//! Result rows, their pass rules, and serialization to CSV plus a
//! human-readable summary.
//!
//! The CSV schema is fixed: `n,statistic,value,target,stderr,pass`, one
//! header line, rows sorted by `(n, statistic)`, floats in shortest
//! round-trip form. Scale-free rows (identity checks, variation bounds)
//! use `n = 0`. Given the same config and master seed the bytes are
//! identical across runs and machines.

use super::HarnessError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// How a row's `value` is judged against its `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// `|value - target| <= max(4 stderr, 5% of |target|)`.
    CloseTo,
    /// `value <= target`.
    AtMost,
    /// `value >= target`.
    AtLeast,
    /// `value < target`, the target being the previous grid level.
    StrictlyBelow,
    /// Recorded for context; always passes.
    Info,
}

impl RuleKind {
    pub fn describe(&self) -> &'static str {
        match self {
            RuleKind::CloseTo => "|value - target| <= max(4*stderr, 5% of |target|)",
            RuleKind::AtMost => "value <= target",
            RuleKind::AtLeast => "value >= target",
            RuleKind::StrictlyBelow => "value < target (previous grid level)",
            RuleKind::Info => "informational",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub n: u64,
    pub statistic: String,
    pub value: f64,
    pub target: f64,
    pub stderr: f64,
    pub pass: bool,
    pub rule: RuleKind,
}

impl ReportRow {
    pub fn close_to(
        n: u64,
        statistic: impl Into<String>,
        value: f64,
        target: f64,
        stderr: f64,
    ) -> Self {
        let pass = (value - target).abs() <= (4.0 * stderr).max(0.05 * target.abs());
        Self { n, statistic: statistic.into(), value, target, stderr, pass, rule: RuleKind::CloseTo }
    }

    pub fn at_most(
        n: u64,
        statistic: impl Into<String>,
        value: f64,
        target: f64,
        stderr: f64,
    ) -> Self {
        let pass = value <= target;
        Self { n, statistic: statistic.into(), value, target, stderr, pass, rule: RuleKind::AtMost }
    }

    pub fn at_least(n: u64, statistic: impl Into<String>, value: f64, target: f64) -> Self {
        let pass = value >= target;
        Self {
            n,
            statistic: statistic.into(),
            value,
            target,
            stderr: 0.0,
            pass,
            rule: RuleKind::AtLeast,
        }
    }

    pub fn strictly_below(n: u64, statistic: impl Into<String>, value: f64, target: f64) -> Self {
        let pass = value < target;
        Self {
            n,
            statistic: statistic.into(),
            value,
            target,
            stderr: 0.0,
            pass,
            rule: RuleKind::StrictlyBelow,
        }
    }

    pub fn info(n: u64, statistic: impl Into<String>, value: f64, target: f64) -> Self {
        Self {
            n,
            statistic: statistic.into(),
            value,
            target,
            stderr: 0.0,
            pass: true,
            rule: RuleKind::Info,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub master_seed: u64,
    pub runtime: Duration,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn new(experiment: impl Into<String>, master_seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            master_seed,
            runtime: Duration::ZERO,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| (a.n, &a.statistic).cmp(&(b.n, &b.statistic)));
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,statistic,value,target,stderr,pass\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{},{}", r.n, r.statistic, r.value, r.target, r.stderr, r.pass)
                .unwrap();
        }
        out
    }

    pub fn summary_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "experiment: {}", self.experiment).unwrap();
        writeln!(out, "master seed: {}", self.master_seed).unwrap();
        writeln!(out, "runtime: {:.3}s", self.runtime.as_secs_f64()).unwrap();
        writeln!(out, "result: {}", if self.all_pass() { "PASS" } else { "FAIL" }).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "[{}] n={} {} value={} target={} stderr={} rule: {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.n,
                r.statistic,
                r.value,
                r.target,
                r.stderr,
                r.rule.describe()
            )
            .unwrap();
        }
        for note in &self.notes {
            writeln!(out, "note: {note}").unwrap();
        }
        out
    }
}

/// Write `<experiment>.csv` and `<experiment>_summary.txt` into `out_dir`,
/// creating it if needed. Returns the two paths.
pub fn emit_report(
    report: &ConvergenceReport,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", report.experiment));
    let summary_path = out_dir.join(format!("{}_summary.txt", report.experiment));
    std::fs::write(&csv_path, report.to_csv_string())?;
    std::fs::write(&summary_path, report.summary_string())?;
    Ok((csv_path, summary_path))
}
