//! Per-(algorithm, lambda) aggregation of a summary file.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub lambda: f64,
    pub seed: u64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "P_bar")]
    pub p_bar: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub iterations: usize,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub algorithm: String,
    pub lambda: f64,
    pub runs: usize,
    #[serde(rename = "H_mean")]
    pub h_mean: f64,
    #[serde(rename = "Pbar_mean")]
    pub p_bar_mean: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    #[serde(rename = "Pbar_min")]
    pub p_bar_min: f64,
    #[serde(rename = "Pbar_max")]
    pub p_bar_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepOutcome {
    /// The summary had a header but no runs.
    Empty,
    Table(Vec<TradeoffRow>),
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening summary {}", path.display()))?;
    r.deserialize()
        .enumerate()
        .map(|(k, row)| row.with_context(|| format!("{}: data row {}", path.display(), k + 1)))
        .collect()
}

/// Groups rows by algorithm, then by lambda in ascending order.
pub fn aggregate(rows: &[SummaryRow]) -> SweepOutcome {
    if rows.is_empty() {
        return SweepOutcome::Empty;
    }
    let mut keys: Vec<(&str, f64)> = rows.iter().map(|r| (r.algorithm.as_str(), r.lambda)).collect();
    keys.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    let table = keys
        .into_iter()
        .map(|(algorithm, lambda)| {
            let group: Vec<&SummaryRow> =
                rows.iter().filter(|r| r.algorithm == algorithm && r.lambda == lambda).collect();
            let n = group.len() as f64;
            let stat = |f: fn(&SummaryRow) -> f64| {
                let vals = group.iter().map(|r| f(r));
                let mean = vals.clone().sum::<f64>() / n;
                (mean, vals.clone().fold(f64::INFINITY, f64::min), vals.fold(f64::NEG_INFINITY, f64::max))
            };
            let (h_mean, h_min, h_max) = stat(|r| r.h);
            let (p_bar_mean, p_bar_min, p_bar_max) = stat(|r| r.p_bar);
            TradeoffRow {
                algorithm: algorithm.to_string(),
                lambda,
                runs: group.len(),
                h_mean,
                p_bar_mean,
                h_min,
                h_max,
                p_bar_min,
                p_bar_max,
            }
        })
        .collect();
    SweepOutcome::Table(table)
}

pub fn write_tradeoff_csv<W: Write>(writer: W, table: &[TradeoffRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in table {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
