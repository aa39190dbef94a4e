//! Report formats. Floats are written with 17 significant digits so every
//! value re-parses to the same `f64`.

use std::fmt::Write as _;

use quake_lab_core::spectrum::{PathScanReport, ScanRow, ScanSummary};
use serde::Serialize;

pub const SCAN_HEADER: &str = "t,n,l0,lt,log_ratio,twist_diff_norm";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn scan_csv(report: &PathScanReport) -> String {
    let mut s = String::with_capacity(96 * (report.rows.len() + 1));
    s.push_str(SCAN_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            float(r.t),
            r.n,
            float(r.l0),
            float(r.lt),
            float(r.log_ratio),
            float(r.twist_diff_norm)
        );
    }
    s
}

/// Rows read back from a scan CSV; rows with NaN lengths are marked as errors.
pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(SCAN_HEADER) {
        return Err("unexpected scan header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(format!("row {}: expected 6 columns", i + 1));
            }
            let f = |k: usize| {
                cols[k]
                    .parse::<f64>()
                    .map_err(|e| format!("row {}, column {}: {e}", i + 1, k + 1))
            };
            let lt = f(3)?;
            Ok(ScanRow {
                t: f(0)?,
                n: cols[1].parse().map_err(|e| format!("row {}: {e}", i + 1))?,
                l0: f(2)?,
                lt,
                log_ratio: f(4)?,
                twist_diff_norm: f(5)?,
                error: lt.is_nan().then(|| "unresolved".to_string()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryFile {
    /// Number of blocks in the window; all verdicts are relative to it.
    pub window: usize,
    pub dip_threshold: f64,
    pub precision: String,
    pub summaries: Vec<SummaryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryEntry {
    pub t: f64,
    pub sup_abs_log_ratio: f64,
    /// `null` when no row at this `t` resolved.
    pub inf_ratio: Option<f64>,
    pub dip_flag: bool,
}

impl From<&ScanSummary> for SummaryEntry {
    fn from(s: &ScanSummary) -> Self {
        SummaryEntry {
            t: s.t,
            sup_abs_log_ratio: s.sup_abs_log_ratio,
            inf_ratio: s.inf_ratio.is_finite().then_some(s.inf_ratio),
            dip_flag: s.dip_flag,
        }
    }
}

pub fn summary_file(report: &PathScanReport, window: usize, precision: &str) -> SummaryFile {
    SummaryFile {
        window,
        dip_threshold: report.dip_threshold,
        precision: precision.to_string(),
        summaries: report.summaries.iter().map(SummaryEntry::from).collect(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}
