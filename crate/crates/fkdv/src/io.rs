//! Flat-file formats: CSV tables and JSON documents.
//!
//! All numbers are written with Rust's shortest round-trip decimal
//! formatting for binary64 ('.' radix), so identical runs produce
//! byte-identical files and parsing them back loses nothing.

use crate::branch::{Branch, ContinuationConfig};
use crate::diagnostics::DiagnosticsReport;
use crate::kernel::{KernelPropertyReport, KernelTable, PropertyCheck};
use crate::spectral::{CosineSeries, SteadyState};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid document: {0}")]
    Invalid(String),
}

fn malformed(line: usize, message: impl Into<String>) -> IoError {
    IoError::Malformed {
        line,
        message: message.into(),
    }
}

/// Write a string to a file, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Kernel table CSV: `x,kp,kp_prime`
// ---------------------------------------------------------------------------

pub fn kernel_table_csv(table: &KernelTable) -> String {
    let mut out = String::from("x,kp,kp_prime\n");
    for ((x, v), d) in table
        .grid
        .iter()
        .zip(&table.values)
        .zip(&table.derivative_values)
    {
        let _ = writeln!(out, "{x},{v},{d}");
    }
    out
}

/// Kernel property report together with the λ constant, serialized with the
/// λ positivity result as one more check row.
pub fn kernel_report_json(
    report: &KernelPropertyReport,
    lambda: f64,
) -> Result<String, IoError> {
    let mut full = report.clone();
    full.checks.push(PropertyCheck {
        check: "lambda_positive".into(),
        pass: lambda > 0.0,
        margin: lambda,
    });
    Ok(serde_json::to_string_pretty(&full)?)
}

// ---------------------------------------------------------------------------
// Series JSON: {alpha, k, mu, coeffs}
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub alpha: f64,
    pub k: u32,
    pub mu: f64,
    pub coeffs: Vec<f64>,
}

impl SeriesDocument {
    pub fn from_state(alpha: f64, state: &SteadyState) -> Self {
        Self {
            alpha,
            k: state.phi.base_wavenumber(),
            mu: state.mu,
            coeffs: state.phi.coeffs().to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(IoError::Invalid(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        if self.k < 1 {
            return Err(IoError::Invalid("k must be at least 1".into()));
        }
        if !self.mu.is_finite() {
            return Err(IoError::Invalid("mu must be finite".into()));
        }
        if self.coeffs.is_empty() {
            return Err(IoError::Invalid("coeffs must be nonempty".into()));
        }
        if let Some(bad) = self.coeffs.iter().find(|c| !c.is_finite()) {
            return Err(IoError::Invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(())
    }

    pub fn into_state(self) -> Result<SteadyState, IoError> {
        self.validate()?;
        let phi = CosineSeries::new(self.k, self.coeffs)
            .map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(SteadyState::new(phi, self.mu))
    }
}

pub fn series_json(doc: &SeriesDocument) -> Result<String, IoError> {
    Ok(serde_json::to_string_pretty(doc)?)
}

pub fn parse_series_json(text: &str) -> Result<SeriesDocument, IoError> {
    let doc: SeriesDocument = serde_json::from_str(text)?;
    doc.validate()?;
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Grid dump CSV: `x,phi`
// ---------------------------------------------------------------------------

/// Evaluate the wave on `n` uniform points covering one full period
/// [−π/k, π/k) and dump as `x,phi` rows.
pub fn grid_csv(phi: &CosineSeries, n: usize) -> String {
    let k = phi.base_wavenumber() as f64;
    let period = std::f64::consts::TAU / k;
    let mut out = String::from("x,phi\n");
    for i in 0..n {
        let x = -0.5 * period + period * i as f64 / n as f64;
        let v = phi.eval(x);
        let _ = writeln!(out, "{x},{v}");
    }
    out
}

// ---------------------------------------------------------------------------
// Branch CSV: `s,mu,crest_gap,a0,...,aN` (rectangular; short rows padded)
// ---------------------------------------------------------------------------

pub fn branch_csv(branch: &Branch) -> String {
    let modes = branch.final_modes();
    let mut out = String::from("s,mu,crest_gap");
    for j in 0..=modes {
        let _ = write!(out, ",a{j}");
    }
    out.push('\n');
    for p in &branch.points {
        let _ = write!(out, "{},{},{}", p.s, p.state.mu, p.crest_gap);
        let coeffs = p.state.phi.coeffs();
        for j in 0..=modes {
            let v = coeffs.get(j).copied().unwrap_or(0.0);
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// One parsed branch-CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCsvRow {
    pub s: f64,
    pub mu: f64,
    pub crest_gap: f64,
    pub coeffs: Vec<f64>,
}

impl BranchCsvRow {
    pub fn into_state(self, k: u32) -> Result<SteadyState, IoError> {
        if !self.mu.is_finite() {
            return Err(IoError::Invalid("non-finite mu".into()));
        }
        let phi =
            CosineSeries::new(k, self.coeffs).map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(SteadyState::new(phi, self.mu))
    }
}

pub fn parse_branch_csv(text: &str) -> Result<Vec<BranchCsvRow>, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(1, "empty file"))?;
    let header = header.trim_end_matches('\r');
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 4 || fields[0] != "s" || fields[1] != "mu" || fields[2] != "crest_gap" {
        return Err(malformed(1, "header must start with s,mu,crest_gap,a0"));
    }
    for (j, name) in fields[3..].iter().enumerate() {
        if *name != format!("a{j}") {
            return Err(malformed(
                1,
                format!("expected column a{j}, found {name}"),
            ));
        }
    }
    let width = fields.len();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let values = values.map_err(|e| malformed(idx + 1, format!("bad number: {e}")))?;
        if values.len() != width {
            return Err(malformed(
                idx + 1,
                format!("expected {width} columns, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(malformed(idx + 1, "non-finite value"));
        }
        rows.push(BranchCsvRow {
            s: values[0],
            mu: values[1],
            crest_gap: values[2],
            coeffs: values[3..].to_vec(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Run metadata JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub alpha: f64,
    pub k: u32,
    pub modes: usize,
    pub newton_tol: f64,
    pub stop_crest_gap: f64,
    pub points: usize,
    pub stopped_reason: String,
}

impl RunMetadata {
    pub fn from_branch(branch: &Branch, config: &ContinuationConfig) -> Self {
        Self {
            alpha: branch.alpha,
            k: branch.k,
            modes: branch.final_modes().max(config.modes),
            newton_tol: config.newton_tol,
            stop_crest_gap: config.stop_crest_gap,
            points: branch.points.len(),
            stopped_reason: branch.stop_reason.to_string(),
        }
    }
}

pub fn metadata_json(meta: &RunMetadata) -> Result<String, IoError> {
    Ok(serde_json::to_string_pretty(meta)?)
}

pub fn parse_metadata_json(text: &str) -> Result<RunMetadata, IoError> {
    let meta: RunMetadata = serde_json::from_str(text)?;
    if !(meta.alpha.is_finite() && meta.alpha > 1.0) {
        return Err(IoError::Invalid("alpha must exceed 1".into()));
    }
    if meta.k < 1 {
        return Err(IoError::Invalid("k must be at least 1".into()));
    }
    Ok(meta)
}

// ---------------------------------------------------------------------------
// Diagnostics JSON array
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointDiagnosticsRecord {
    pub s: f64,
    pub mu: f64,
    pub crest_gap: f64,
    pub all_pass: bool,
    #[serde(flatten)]
    pub report: DiagnosticsReport,
}

pub fn diagnostics_json(branch: &Branch) -> Result<String, IoError> {
    let records: Vec<PointDiagnosticsRecord> = branch
        .points
        .iter()
        .filter_map(|p| {
            p.diagnostics.as_ref().map(|report| PointDiagnosticsRecord {
                s: p.s,
                mu: p.state.mu,
                crest_gap: p.crest_gap,
                all_pass: report.all_pass(),
                report: report.clone(),
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&records)?)
}
