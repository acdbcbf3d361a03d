//! Versioned experiment report.
//!
//! Everything under `deterministic` is byte-for-byte reproducible for a
//! fixed seed; wall-clock measurements live in the separate `timing` field.
//! Readers reject unknown fields and other schema versions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::FlopsReport;
use crate::error::{Error, Result};

use super::io::atomic_write;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryTriple {
    pub unpruned: f64,
    pub random: f64,
    pub sta: f64,
}

/// One repeat of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub seed: u64,
    /// L-infinity distance between pruned and unpruned logits.
    pub logits_drift: f64,
    /// Tokens entering each block of the pruned forward.
    pub per_block_tokens: Vec<usize>,
    /// Final-layer trajectory sums of the three pipelines.
    pub trajectory: TrajectoryTriple,
    /// Top-decile semantic retention, averaged over pruning stages.
    pub retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub logits_drift: MeanStd,
    pub trajectory_unpruned: MeanStd,
    pub trajectory_random: MeanStd,
    pub trajectory_sta: MeanStd,
    pub retention: MeanStd,
}

/// Seed-reproducible portion of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deterministic {
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
    pub flops: FlopsReport,
}

/// Wall-clock measurements, excluded from reproducibility comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub deterministic: Deterministic,
    pub timing: Timing,
}

impl Report {
    /// JSON bytes of the deterministic portion only.
    pub fn deterministic_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.deterministic)
            .map_err(|e| Error::Numeric(format!("report serialization: {e}")))
    }
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Numeric(format!("report serialization: {e}")))?;
    atomic_write(path, json.as_bytes())
}

/// Strict read: unknown fields and foreign schema versions are rejected.
pub fn read_report(path: &Path) -> Result<Report> {
    let bytes = std::fs::read(path)?;
    let report: Report = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Config(format!("report parse: {e}")))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "report schema version {} unsupported (expected {REPORT_SCHEMA_VERSION})",
            report.schema_version
        )));
    }
    Ok(report)
}
