use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Serialize;

use super::{read_manifest, ExperimentError};
use crate::federation::{parse_history_csv, HistoryRow};

pub const COMPARISON_HEADER: &str = "label,accuracy,precision,recall,f1,seconds";
pub const CURVES_HEADER: &str = "run,round,metric,value";

/// One experiment; scores are percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{COMPARISON_HEADER}\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.2},{:.2},{:.2},{:.2},{:.3}",
                csv_field(&r.label),
                r.accuracy,
                r.precision,
                r.recall,
                r.f1,
                r.seconds
            )
            .expect("writing to a String");
        }
        out
    }

    /// Column-aligned table for terminals.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.chars().count())
            .chain(std::iter::once("Experiment".len()))
            .max()
            .unwrap_or(0);
        let mut out = format!(
            "{:<width$}  {:>8}  {:>9}  {:>8}  {:>8}  {:>10}\n",
            "Experiment", "Accuracy", "Precision", "Recall", "F1", "Seconds"
        );
        for r in &self.rows {
            writeln!(
                out,
                "{:<width$}  {:>8.2}  {:>9.2}  {:>8.2}  {:>8.2}  {:>10.3}",
                r.label, r.accuracy, r.precision, r.recall, r.f1, r.seconds
            )
            .expect("writing to a String");
        }
        out
    }
}

/// One row per run manifest, sorted by label. HFL manifests also
/// contribute their per-client rows.
pub fn cmd_compare(manifests: &[PathBuf]) -> Result<ComparisonTable, ExperimentError> {
    if manifests.is_empty() {
        return Err(ExperimentError::Config("compare needs at least one manifest".into()));
    }
    let mut rows = Vec::new();
    for path in manifests {
        let m = read_manifest(path)?;
        let pct = |v: f64| v * 100.0;
        rows.push(ComparisonRow {
            label: m.label.clone(),
            accuracy: pct(m.metrics.accuracy),
            precision: pct(m.metrics.precision),
            recall: pct(m.metrics.recall),
            f1: pct(m.metrics.f1),
            seconds: m.train_seconds,
        });
        for c in &m.client_metrics {
            rows.push(ComparisonRow {
                label: c.label.clone(),
                accuracy: pct(c.metrics.accuracy),
                precision: pct(c.metrics.precision),
                recall: pct(c.metrics.recall),
                f1: pct(c.metrics.f1),
                seconds: m.train_seconds,
            });
        }
    }
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(ComparisonTable { rows })
}

/// `runs/hfl_4_2/history.csv` is named `hfl_4_2`; any other file by its stem.
pub fn curve_run_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    if stem.as_deref() == Some("history") {
        if let Some(parent) = path.parent().and_then(|p| p.file_name()) {
            return parent.to_string_lossy().into_owned();
        }
    }
    stem.unwrap_or_else(|| path.display().to_string())
}

/// Long-format learning curves, one line per (run, round, metric).
pub fn cmd_curves(histories: &[(String, PathBuf)]) -> Result<String, ExperimentError> {
    if histories.is_empty() {
        return Err(ExperimentError::Config("curves needs at least one history CSV".into()));
    }
    let mut out = format!("{CURVES_HEADER}\n");
    for (run, path) in histories {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let rows = parse_history_csv(&text).map_err(|e| ExperimentError::Manifest {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if rows.is_empty() {
            warn!("{}: history has no rounds", path.display());
        }
        let run = csv_field(run);
        for row in rows {
            for (name, value) in HistoryRow::METRICS.iter().zip(row.metric_values()) {
                writeln!(out, "{run},{},{name},{value}", row.round).expect("writing to a String");
            }
        }
    }
    Ok(out)
}
