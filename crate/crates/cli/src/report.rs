//! Run reports and their JSON / CSV renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use lplab_core::constants::ConstantsReport;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub fname: String,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// A named check; `bound: None` marks an informational value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub subject: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Diagnostic {
    pub fn bounded(name: &str, subject: &str, value: f64, bound: f64) -> Self {
        Diagnostic {
            name: name.to_string(),
            subject: subject.to_string(),
            value,
            bound: Some(bound),
            pass: value.is_finite() && value <= bound,
        }
    }

    pub fn info(name: &str, subject: &str, value: f64) -> Self {
        Diagnostic {
            name: name.to_string(),
            subject: subject.to_string(),
            value,
            bound: None,
            pass: true,
        }
    }
}

/// Plot-ready table written to `plotdata/<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub rows: Vec<Row>,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    /// `max_ratio / min_ratio`.
    pub spread: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
    pub conditions: Option<ConstantsReport>,
    pub plots: Vec<PlotTable>,
    pub metadata: Metadata,
    pub pass: bool,
}

impl Report {
    /// Report with the ratio summary filled in from `rows`; `pass` still needs
    /// [`Report::finish`].
    pub fn new(cfg: &ExperimentConfig, rows: Vec<Row>) -> Self {
        let max_ratio = rows.iter().map(|r| r.ratio).reduce(f64::max);
        let min_ratio = rows.iter().map(|r| r.ratio).reduce(f64::min);
        let spread = match (max_ratio, min_ratio) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        Report {
            scenario: cfg.scenario,
            rows,
            max_ratio,
            min_ratio,
            spread,
            diagnostics: Vec::new(),
            conditions: None,
            plots: Vec::new(),
            metadata: Metadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: cfg.test_family.seed,
                config: cfg.clone(),
            },
            pass: false,
        }
    }

    /// Passing means every ratio is finite and positive and every bounded diagnostic holds.
    pub fn finish(mut self) -> Self {
        let ratios_ok = self.rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
        self.pass = ratios_ok && self.diagnostics.iter().all(|d| d.pass);
        self
    }

    pub fn failures(&self) -> Vec<&Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.pass).collect()
    }
}

pub fn ratios_csv(r: &Report) -> String {
    let mut out = String::from("fname,lambda,lhs,rhs,ratio\n");
    for row in &r.rows {
        writeln!(out, "{},{},{},{},{}", row.fname, row.lambda, row.lhs, row.rhs, row.ratio).unwrap();
    }
    out
}

pub fn table_csv(t: &PlotTable) -> String {
    let mut out = t.header.join(",");
    out.push('\n');
    for row in &t.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `report.json`, `ratios.csv` and `plotdata/*.csv` under `dir`.
pub fn emit_report(r: &Report, dir: &Path) -> Result<()> {
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).with_context(|| format!("creating {}", plot_dir.display()))?;
    let json = serde_json::to_string_pretty(r)?;
    write(&dir.join("report.json"), &json)?;
    write(&dir.join("ratios.csv"), &ratios_csv(r))?;
    for t in &r.plots {
        write(&plot_dir.join(format!("{}.csv", t.name)), &table_csv(t))?;
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}
