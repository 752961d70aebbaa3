//! Result files: `records.csv`, `traces.csv` and `summary.json`.
//!
//! CSV floats are written in scientific notation with 17 significant digits.
//! Per-UE rates and agent components are `;`-joined inside one column.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::campaign::{Aggregate, CampaignResult, Failure, Record};
use super::{HarnessError, SystemConfig};

pub const RECORD_COLUMNS: [&str; 13] = [
    "realization",
    "p_t_dbm",
    "algorithm",
    "fairness",
    "objective",
    "sum_rate",
    "jain",
    "rate_gap",
    "min_rate",
    "energy_efficiency",
    "evaluations",
    "rates",
    "agent",
];

pub const TRACE_COLUMNS: [&str; 6] = [
    "realization",
    "p_t_dbm",
    "algorithm",
    "fairness",
    "iteration",
    "best_objective",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub code_version: String,
    pub master_seed: u64,
    pub n_records: usize,
    pub failures: Vec<Failure>,
    pub aggregates: Vec<Aggregate>,
    pub config: SystemConfig,
}

impl Summary {
    pub fn from_result(result: &CampaignResult) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: result.config.master_seed,
            n_records: result.records.len(),
            failures: result.failures.clone(),
            aggregates: result.aggregates.clone(),
            config: result.config.clone(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn record_row(r: &Record) -> Vec<String> {
    vec![
        r.realization.to_string(),
        num(r.p_t_dbm),
        r.method.to_string(),
        r.fairness.to_string(),
        num(r.objective),
        num(r.metrics.sum_rate),
        r.metrics.jain.map(num).unwrap_or_default(),
        num(r.metrics.rate_gap),
        num(r.metrics.min_rate()),
        num(r.metrics.energy_efficiency),
        r.evaluations.to_string(),
        joined(&r.metrics.per_ue_rates),
        joined(&r.agent),
    ]
}

/// Writes the three result files into `out_dir`, creating it if needed.
pub fn emit_results(result: &CampaignResult, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir)?;

    let mut records = csv::Writer::from_path(out_dir.join("records.csv"))?;
    records.write_record(RECORD_COLUMNS)?;
    for r in &result.records {
        records.write_record(record_row(r))?;
    }
    records.flush()?;

    let mut traces = csv::Writer::from_path(out_dir.join("traces.csv"))?;
    traces.write_record(TRACE_COLUMNS)?;
    for r in &result.records {
        for (q, best) in r.trace.iter().enumerate() {
            traces.write_record([
                r.realization.to_string(),
                num(r.p_t_dbm),
                r.method.to_string(),
                r.fairness.to_string(),
                q.to_string(),
                num(*best),
            ])?;
        }
    }
    traces.flush()?;

    let summary = serde_json::to_string_pretty(&Summary::from_result(result))?;
    fs::write(out_dir.join("summary.json"), summary + "\n")?;
    Ok(())
}
