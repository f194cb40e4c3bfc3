use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchReport, BenchRow};
use crate::error::{Error, Result};

/// CSV column order, one row per (dataset, scenario, repetition).
pub const REPORT_COLUMNS: [&str; 17] = [
    "dataset",
    "scenario",
    "repetition",
    "seed",
    "tuning_seconds",
    "encoding_seconds",
    "validation_f1",
    "best_cv_f1",
    "trials",
    "encoded_column_count",
    "max_depth",
    "learning_rate",
    "rounds",
    "min_child_weight",
    "subsample",
    "colsample",
    "l2_lambda",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Band {
    /// Summaries of a non-empty sample, accumulated in the given order.
    pub fn of(values: &[f64]) -> Band {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // keep min ≤ mean ≤ max under rounding
        Band {
            mean: mean.clamp(min, max),
            min,
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub scenario: String,
    pub repetitions: usize,
    pub validation_f1: Band,
    pub tuning_seconds: Band,
    pub encoding_seconds: Band,
    pub encoded_column_count: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub dataset: String,
    /// Scenarios by descending mean validation f1.
    pub by_validation_f1: Vec<String>,
    /// Scenarios by ascending mean tuning time.
    pub by_tuning_seconds: Vec<String>,
}

/// Groups rows by (dataset, scenario), summarising each group in repetition
/// order so the result does not depend on the order of `rows`.
pub fn aggregate(rows: &[BenchRow]) -> (Vec<Aggregate>, Vec<Ranking>) {
    let mut groups: BTreeMap<(&str, &str), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.dataset, &r.scenario)).or_default().push(r);
    }
    let aggregates: Vec<Aggregate> = groups
        .into_iter()
        .map(|((dataset, scenario), mut rs)| {
            rs.sort_by(|a, b| a.repetition.cmp(&b.repetition).then(a.seed.cmp(&b.seed)));
            let band = |f: fn(&BenchRow) -> f64| Band::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            Aggregate {
                dataset: dataset.to_string(),
                scenario: scenario.to_string(),
                repetitions: rs.len(),
                validation_f1: band(|r| r.validation_f1),
                tuning_seconds: band(|r| r.tuning_seconds),
                encoding_seconds: band(|r| r.encoding_seconds),
                encoded_column_count: band(|r| r.encoded_column_count as f64),
            }
        })
        .collect();

    let mut per_dataset: BTreeMap<&str, Vec<&Aggregate>> = BTreeMap::new();
    for a in &aggregates {
        per_dataset.entry(&a.dataset).or_default().push(a);
    }
    let rankings = per_dataset
        .into_iter()
        .map(|(dataset, aggs)| {
            let mut by_f1 = aggs.clone();
            by_f1.sort_by(|a, b| {
                b.validation_f1
                    .mean
                    .total_cmp(&a.validation_f1.mean)
                    .then_with(|| a.scenario.cmp(&b.scenario))
            });
            let mut by_time = aggs;
            by_time.sort_by(|a, b| {
                a.tuning_seconds
                    .mean
                    .total_cmp(&b.tuning_seconds.mean)
                    .then_with(|| a.scenario.cmp(&b.scenario))
            });
            Ranking {
                dataset: dataset.to_string(),
                by_validation_f1: by_f1.iter().map(|a| a.scenario.clone()).collect(),
                by_tuning_seconds: by_time.iter().map(|a| a.scenario.clone()).collect(),
            }
        })
        .collect();
    (aggregates, rankings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let value = serde_json::to_value(report)?;
            let mut bytes = serde_json::to_vec_pretty(&value)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS)?;
            for r in &report.rows {
                let p = &r.best_params;
                w.write_record([
                    r.dataset.clone(),
                    r.scenario.clone(),
                    r.repetition.to_string(),
                    r.seed.to_string(),
                    r.tuning_seconds.to_string(),
                    r.encoding_seconds.to_string(),
                    r.validation_f1.to_string(),
                    r.best_cv_f1.to_string(),
                    r.trials.to_string(),
                    r.encoded_column_count.to_string(),
                    p.max_depth.to_string(),
                    p.learning_rate.to_string(),
                    p.rounds.to_string(),
                    p.min_child_weight.to_string(),
                    p.subsample.to_string(),
                    p.colsample.to_string(),
                    p.l2_lambda.to_string(),
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}
