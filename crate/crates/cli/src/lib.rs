//! Report files and renderers for `harnack-lab`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use harnack_core::checks::{check_by_id, CheckReport, CheckStatus, SuiteReport};
use harnack_core::gridlab::ConvergenceReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Run parameters echoed into the report file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub suite: String,
    pub soliton: String,
    pub points: usize,
    pub order: usize,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl From<CheckStatus> for Status {
    fn from(s: CheckStatus) -> Self {
        match s {
            CheckStatus::Pass => Status::Pass,
            CheckStatus::Fail => Status::Fail,
            CheckStatus::Skipped => Status::Skipped,
        }
    }
}

/// One `(check, soliton)` row. Non-finite residuals (a sample that failed
/// to evaluate) are written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub check_id: String,
    pub soliton: String,
    pub n_points: usize,
    pub max_rel_residual: Option<f64>,
    pub median_rel_residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    pub millis: u64,
}

impl From<&CheckReport> for ReportEntry {
    fn from(r: &CheckReport) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            check_id: r.check_id.clone(),
            soliton: r.soliton.clone(),
            n_points: r.n_points,
            max_rel_residual: finite(r.max_rel_residual),
            median_rel_residual: finite(r.median_rel_residual),
            tolerance: r.tolerance,
            status: r.status.into(),
            millis: r.millis,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: u32,
    pub seed: u64,
    pub config: ConfigEcho,
    pub reports: Vec<ReportEntry>,
}

impl ReportFile {
    pub fn new(seed: u64, config: ConfigEcho, suite: &SuiteReport) -> Self {
        Self { version: SCHEMA_VERSION, seed, config, reports: suite.reports.iter().map(ReportEntry::from).collect() }
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.status != Status::Fail)
    }

    /// Later files override earlier ones for the same `(check, soliton)`.
    pub fn merge(files: Vec<ReportFile>) -> Option<ReportFile> {
        let mut iter = files.into_iter();
        let mut merged = iter.next()?;
        for file in iter {
            for entry in file.reports {
                match merged.reports.iter_mut().find(|e| e.check_id == entry.check_id && e.soliton == entry.soliton) {
                    Some(slot) => *slot = entry,
                    None => merged.reports.push(entry),
                }
            }
        }
        merged.reports.sort_by(|a, b| (&a.check_id, &a.soliton).cmp(&(&b.check_id, &b.soliton)));
        Some(merged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            let anchor = check_by_id(&r.check_id).map(|c| c.anchor).unwrap_or("");
            let res = match (r.status, r.max_rel_residual) {
                (Status::Skipped, _) => "-".to_string(),
                (_, Some(x)) => format!("{x:.2e}"),
                (_, None) => "error".to_string(),
            };
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            let _ = writeln!(out, "{status:4}  {:8} {:22} {:>9} / {:.0e}  {anchor}", r.check_id, r.soliton, res, r.tolerance);
        }
        let count = |s| self.reports.iter().filter(|r| r.status == s).count();
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} skipped",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skipped)
        );
        out
    }
}

/// Per-sample rows: `check_id,soliton,point_index,residual`.
pub fn suite_csv(suite: &SuiteReport) -> String {
    let mut out = String::from("check_id,soliton,point_index,residual\n");
    for r in &suite.reports {
        for (i, x) in r.residuals.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{:e}", r.check_id, r.soliton, i, x);
        }
    }
    out
}

/// Summary-only CSV for merged files, which carry no per-sample data.
pub fn file_csv(file: &ReportFile) -> String {
    let mut out = String::from("check_id,soliton,point_index,residual\n");
    for r in &file.reports {
        if let Some(x) = r.max_rel_residual.filter(|_| r.status != Status::Skipped) {
            let _ = writeln!(out, "{},{},max,{:e}", r.check_id, r.soliton, x);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GridFile {
    pub version: u32,
    pub seed: u64,
    pub reports: Vec<GridEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridEntry {
    #[serde(flatten)]
    pub report: ConvergenceReport,
    pub order_band: (f64, Option<f64>),
    pub passed: bool,
}

pub fn grid_text(reports: &[ConvergenceReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{}  {:?}  {}", r.check_id, r.status, if r.passed() { "pass" } else { "FAIL" });
        for row in &r.rows {
            let order = row.observed_order.map(|p| format!("{p:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "  N={:<5} residual={:.3e}  order={order}", row.n, row.residual);
        }
    }
    out
}

pub fn grid_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = String::from("check_id,N,residual,observed_order\n");
    for r in reports {
        for line in r.to_csv().lines().skip(1) {
            let _ = writeln!(out, "{},{line}", r.check_id);
        }
    }
    out
}
