//! Trace CSV, summary JSON, codebook JSON, and resource-table writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! emitted number parses back to the exact same f64.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use noq::cost::EncodingReport;
use noq::optimizer::TraceRecord;
use noq::Codebook;

pub const TRACE_HEADER: &str =
    "epoch,soft_cost,hard_cost,grad_norm,min_purity,max_purity,elapsed_ms";

/// Renders a per-seed optimization trace as CSV text.
pub fn trace_csv(trace: &[TraceRecord<f64>]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in trace {
        let min_purity = rec.purities.iter().copied().fold(f64::INFINITY, f64::min);
        let max_purity = rec
            .purities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rec.epoch,
            rec.soft_cost,
            rec.hard_cost,
            rec.grad_norm,
            min_purity,
            max_purity,
            rec.elapsed_ms
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Outcome of one seed, as recorded in the summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub best_hard_cost: f64,
    pub best_soft_cost: f64,
    pub epochs_run: usize,
    pub target_reached: bool,
    /// Diagnostic when the run stopped on a non-finite objective.
    pub aborted: Option<String>,
    pub trace_file: String,
}

/// The overall best decode across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSummary {
    pub seed: u64,
    pub hard_cost: f64,
    pub soft_cost: f64,
    pub epochs_used: usize,
    pub labels: Vec<usize>,
    pub values: Vec<f64>,
}

/// Top-level summary JSON for an `optimize` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub n_vars: usize,
    pub p: usize,
    pub layers: usize,
    pub gradient_mode: String,
    pub shots: Option<u64>,
    pub target_cost: f64,
    pub target_reached: bool,
    pub best: BestSummary,
    pub seeds: Vec<SeedSummary>,
}

/// Codebook JSON with a metrics block. The `p`/`vectors` fields follow the
/// plain codebook schema, so the emitted file loads anywhere a codebook file
/// is accepted; `metrics` is informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub p: usize,
    pub vectors: Vec<[f64; 3]>,
    pub metrics: CodebookMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookMetrics {
    pub min_pairwise_angle: f64,
    pub riesz_energy: f64,
    pub balance_norm: f64,
}

pub fn codebook_file(cb: &Codebook) -> CodebookFile {
    CodebookFile {
        p: cb.p(),
        vectors: cb.vectors().iter().map(|v| [v.x, v.y, v.z]).collect(),
        metrics: CodebookMetrics {
            min_pairwise_angle: cb.min_pairwise_angle(),
            riesz_energy: cb.riesz_energy(),
            balance_norm: cb.balance_norm(),
        },
    }
}

pub const ESTIMATE_HEADER: &str = "p,bits,qubits_standard,qubits_nonorthogonal";

/// Renders resource rows as CSV text with the pinned column order.
pub fn estimate_csv(rows: &[EncodingReport]) -> String {
    let mut out = String::new();
    out.push_str(ESTIMATE_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.p, row.total_bits, row.qubits_standard, row.qubits_nonorthogonal
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use noq::decoder::Configuration;

    #[test]
    fn trace_csv_round_trips_through_float_parsing() {
        let trace = vec![TraceRecord {
            epoch: 1,
            soft_cost: 0.1 + 0.2,
            hard_cost: 16.0,
            configuration: Configuration::from_labels(vec![0], 2).unwrap(),
            purities: vec![0.7300000000000001, 0.99],
            grad_norm: 1e-9,
            elapsed_ms: 12.5,
        }];
        let csv = trace_csv(&trace);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0].parse::<usize>().unwrap(), 1);
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(row[4].parse::<f64>().unwrap(), 0.7300000000000001);
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.99);
    }

    #[test]
    fn summary_json_round_trips_through_its_schema() {
        let summary = RunSummary {
            problem: "bench-poly8".into(),
            n_vars: 15,
            p: 20,
            layers: 6,
            gradient_mode: "adjoint".into(),
            shots: None,
            target_cost: 1e-2,
            target_reached: false,
            best: BestSummary {
                seed: 3,
                hard_cost: 16.0,
                soft_cost: 3.7e6,
                epochs_used: 500,
                labels: vec![9; 15],
                values: vec![0.0; 15],
            },
            seeds: vec![SeedSummary {
                seed: 3,
                best_hard_cost: 16.0,
                best_soft_cost: 3.7e6,
                epochs_run: 500,
                target_reached: false,
                aborted: Some("objective became non-finite at epoch 7".into()),
                trace_file: "trace_seed3.csv".into(),
            }],
        };
        let text = serde_json::to_string_pretty(&summary).unwrap();
        let back: RunSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, summary);
    }

    #[test]
    fn codebook_file_is_loadable_as_a_plain_codebook() {
        let cb = noq::codebook::platonic_codebook::<f64>(4).unwrap();
        let file = codebook_file(&cb);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let back = Codebook::from_json(&text).unwrap();
        assert_eq!(back, cb);
        assert!(file.metrics.balance_norm < 1e-9);
    }
}
