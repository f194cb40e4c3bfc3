use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::fit::TransformRecord;
use crate::schema::{compute_categoric_stats, compute_numeric_stats, RawStats};
use crate::table::{Cell, RawTable};

/// Spread floor when normalizing numeric shifts.
pub const DRIFT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureDrift {
    Numeric {
        feature: String,
        /// `|Δmean| / max(σ_train, ε)`; absent when the new column has no values.
        mean_shift: Option<f64>,
        /// `|Δstd| / max(σ_train, ε)`.
        std_shift: Option<f64>,
        /// New minus train missing fraction.
        missing_delta: f64,
    },
    Categoric {
        feature: String,
        /// Total variation over the train categories plus one bucket for unseen ones.
        total_variation: f64,
        /// Fraction of present new values absent from the train frequency table.
        unseen_mass: f64,
        missing_delta: f64,
    },
}

impl FeatureDrift {
    pub fn feature(&self) -> &str {
        match self {
            FeatureDrift::Numeric { feature, .. } | FeatureDrift::Categoric { feature, .. } => feature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub features: Vec<FeatureDrift>,
    /// Baseline features the new table did not contain.
    pub absent: Vec<String>,
}

fn missing_fraction(column: &[Cell], present: usize) -> f64 {
    if column.is_empty() {
        0.0
    } else {
        (column.len() - present) as f64 / column.len() as f64
    }
}

/// Compares `table` against the fit-time statistics stored in the record.
pub fn drift_report(record: &TransformRecord, table: &RawTable) -> DriftReport {
    let mut features = Vec::new();
    let mut absent = Vec::new();
    for entry in &record.drift_baseline {
        let Some(column) = table.column(&entry.feature) else {
            absent.push(entry.feature.clone());
            continue;
        };
        match &entry.stats {
            RawStats::Numeric(base) => {
                let values: Vec<Option<f64>> = column.iter().map(Cell::as_number).collect();
                let present = values.iter().filter(|v| v.is_some()).count();
                let scale = base.population_std.max(DRIFT_EPS);
                let new = compute_numeric_stats(&values).ok();
                features.push(FeatureDrift::Numeric {
                    feature: entry.feature.clone(),
                    mean_shift: new.as_ref().map(|s| (s.mean - base.mean).abs() / scale),
                    std_shift: new
                        .as_ref()
                        .map(|s| (s.population_std - base.population_std).abs() / scale),
                    missing_delta: missing_fraction(column, present) - base.missing_fraction,
                });
            }
            RawStats::Categoric(base) => {
                let new = compute_categoric_stats(column);
                let new_present: usize = new.frequency_table.iter().map(|(_, c)| c).sum();
                let base_present: usize = base.frequency_table.iter().map(|(_, c)| c).sum();
                let share = |count: usize, total: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
                let new_counts: HashMap<&str, usize> =
                    new.frequency_table.iter().map(|(k, c)| (k.as_str(), *c)).collect();
                let mut seen = 0;
                let mut diff = 0.0;
                for (k, c) in &base.frequency_table {
                    let q = new_counts.get(k.as_str()).copied().unwrap_or(0);
                    seen += q;
                    diff += (share(*c, base_present) - share(q, new_present)).abs();
                }
                let unseen_mass = share(new_present - seen, new_present);
                features.push(FeatureDrift::Categoric {
                    feature: entry.feature.clone(),
                    total_variation: 0.5 * (diff + unseen_mass),
                    unseen_mass,
                    missing_delta: new.missing_fraction - base.missing_fraction,
                });
            }
        }
    }
    DriftReport { features, absent }
}
