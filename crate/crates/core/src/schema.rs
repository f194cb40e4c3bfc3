//! Role inference and the raw per-feature statistics that encoders fit against.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Cell, RawTable};

pub const DEFAULT_CARDINALITY_THRESHOLD: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Numeric,
    Categoric,
    HighCardinality,
    Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericStats {
    pub count: usize,
    pub mean: f64,
    pub population_std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// Median absolute deviation from the median (unscaled).
    pub mad: f64,
    pub skewness: f64,
    pub q01: f64,
    pub q25: f64,
    pub q75: f64,
    pub q99: f64,
    /// Share of finite values outside `median ± 3·IQR`.
    pub outlier_fraction: f64,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricStats {
    pub unique_count: usize,
    /// Descending by count, ties lexicographically ascending.
    pub frequency_table: Vec<(String, usize)>,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RawStats {
    Numeric(NumericStats),
    Categoric(CategoricStats),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub role: Role,
    pub raw_stats: RawStats,
}

impl FeatureSchema {
    pub fn numeric_stats(&self) -> Option<&NumericStats> {
        match &self.raw_stats {
            RawStats::Numeric(s) => Some(s),
            RawStats::Categoric(_) => None,
        }
    }

    pub fn categoric_stats(&self) -> Option<&CategoricStats> {
        match &self.raw_stats {
            RawStats::Categoric(s) => Some(s),
            RawStats::Numeric(_) => None,
        }
    }
}

/// Linear interpolation between closest ranks over an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Finite numeric readings of a column; missing and unparseable cells are skipped.
pub fn finite_values(column: &[Cell]) -> Vec<f64> {
    column.iter().filter_map(Cell::as_number).collect()
}

pub fn compute_numeric_stats(values: &[Option<f64>]) -> Result<NumericStats> {
    let mut finite: Vec<f64> = values.iter().filter_map(|v| v.filter(|x| x.is_finite())).collect();
    if finite.is_empty() {
        return Err(Error::AllMissing("<values>".into()));
    }
    let missing_fraction = (values.len() - finite.len()) as f64 / values.len() as f64;
    finite.sort_by(f64::total_cmp);
    let mut stats = stats_from_sorted(&finite);
    stats.missing_fraction = missing_fraction;
    Ok(stats)
}

fn stats_from_sorted(sorted: &[f64]) -> NumericStats {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let m2 = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = sorted.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let population_std = m2.sqrt();
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    let median = quantile_sorted(sorted, 0.5);
    let mut deviations: Vec<f64> = sorted.iter().map(|x| (x - median).abs()).collect();
    deviations.sort_by(f64::total_cmp);
    let mad = quantile_sorted(&deviations, 0.5);
    let q25 = quantile_sorted(sorted, 0.25);
    let q75 = quantile_sorted(sorted, 0.75);
    let iqr = q75 - q25;
    let (lo, hi) = (median - 3.0 * iqr, median + 3.0 * iqr);
    let outliers = sorted.iter().filter(|&&x| x < lo || x > hi).count();
    NumericStats {
        count: sorted.len(),
        mean,
        population_std,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        median,
        mad,
        skewness,
        q01: quantile_sorted(sorted, 0.01),
        q25,
        q75,
        q99: quantile_sorted(sorted, 0.99),
        outlier_fraction: outliers as f64 / n,
        missing_fraction: 0.0,
    }
}

pub fn compute_categoric_stats(column: &[Cell]) -> CategoricStats {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut present = 0usize;
    for cell in column {
        if let Some(s) = cell.as_text() {
            *counts.entry(s).or_default() += 1;
            present += 1;
        }
    }
    let mut frequency_table: Vec<(String, usize)> = counts.into_iter().collect();
    frequency_table.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let missing_fraction = if column.is_empty() {
        0.0
    } else {
        (column.len() - present) as f64 / column.len() as f64
    };
    CategoricStats {
        unique_count: frequency_table.len(),
        frequency_table,
        missing_fraction,
    }
}

fn column_is_numeric(column: &[Cell]) -> bool {
    let mut any = false;
    for cell in column {
        if cell.is_missing() {
            continue;
        }
        if cell.as_number().is_none() {
            return false;
        }
        any = true;
    }
    any
}

pub fn infer_schema(
    table: &RawTable,
    label_name: Option<&str>,
    cardinality_threshold: usize,
) -> Result<Vec<FeatureSchema>> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    if let Some(label) = label_name {
        if table.column_index(label).is_none() {
            return Err(Error::ColumnNotFound(label.to_string()));
        }
    }
    table
        .column_names()
        .iter()
        .zip(table.columns())
        .map(|(name, column)| {
            let is_label = label_name == Some(name.as_str());
            let (role, raw_stats) = if is_label {
                (Role::Label, RawStats::Categoric(compute_categoric_stats(column)))
            } else if column_is_numeric(column) {
                let values: Vec<Option<f64>> = column.iter().map(Cell::as_number).collect();
                let stats = compute_numeric_stats(&values).map_err(|_| Error::AllMissing(name.clone()))?;
                (Role::Numeric, RawStats::Numeric(stats))
            } else {
                let stats = compute_categoric_stats(column);
                let role = if stats.unique_count > cardinality_threshold {
                    Role::HighCardinality
                } else {
                    Role::Categoric
                };
                (role, RawStats::Categoric(stats))
            };
            Ok(FeatureSchema {
                name: name.clone(),
                role,
                raw_stats,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(vals: &[&str]) -> Vec<Cell> {
        vals.iter().map(|s| Cell::from_field(s)).collect()
    }

    #[test]
    fn role_examples() {
        let distinct: Vec<String> = (0..300).map(|i| format!("id{i}")).collect();
        let distinct: Vec<&str> = distinct.iter().map(String::as_str).collect();
        let mut c = col(&["a", "b", "a"]);
        c.extend(col(&["a"; 297]));
        let t = RawTable::from_columns(vec![
            (
                "num",
                col(&["1.5", "2.0", "-3"]).into_iter().chain(col(&["1"; 297])).collect(),
            ),
            ("cat", c),
            ("hc", col(&distinct)),
        ])
        .unwrap();
        let s = infer_schema(&t, None, DEFAULT_CARDINALITY_THRESHOLD).unwrap();
        assert_eq!(s[0].role, Role::Numeric);
        assert_eq!(s[1].role, Role::Categoric);
        assert_eq!(s[1].categoric_stats().unwrap().unique_count, 2);
        assert_eq!(s[2].role, Role::HighCardinality);
    }

    #[test]
    fn label_keeps_role() {
        let t = RawTable::from_columns(vec![("x", col(&["1", "2"])), ("y", col(&["0", "1"]))]).unwrap();
        let s = infer_schema(&t, Some("y"), 255).unwrap();
        assert_eq!(s[1].role, Role::Label);
        assert!(matches!(
            infer_schema(&t, Some("z"), 255),
            Err(Error::ColumnNotFound(_))
        ));
    }

    #[test]
    fn empty_table_rejected() {
        let t = RawTable::from_columns(vec![("x", Vec::<Cell>::new())]).unwrap();
        assert!(matches!(infer_schema(&t, None, 255), Err(Error::EmptyTable)));
    }

    #[test]
    fn numeric_stats_examples() {
        let s = compute_numeric_stats(&[Some(1.0), Some(2.0), Some(3.0), Some(4.0)]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.population_std - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((s.population_std - 1.118034).abs() < 1e-6);

        let c = compute_numeric_stats(&[Some(5.0); 3]).unwrap();
        assert_eq!(c.population_std, 0.0);
        assert_eq!(c.mad, 0.0);
        assert_eq!(c.skewness, 0.0);

        let m = compute_numeric_stats(&[Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert!((m.missing_fraction - 1.0 / 3.0).abs() < 1e-15);

        assert!(compute_numeric_stats(&[None, None]).is_err());
    }

    #[test]
    fn frequency_table_order() {
        let s = compute_categoric_stats(&col(&["red", "blue", "red", "", "green", "blue"]));
        let keys: Vec<&str> = s.frequency_table.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["blue", "red", "green"]);
        let total: usize = s.frequency_table.iter().map(|e| e.1).sum();
        assert_eq!(total as f64, 6.0 * (1.0 - s.missing_fraction));
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 10.0];
        assert_eq!(quantile_sorted(&v, 0.25), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.99), 7.0);
    }

    proptest! {
        #[test]
        fn stats_permutation_invariant_and_ordered(
            mut v in prop::collection::vec(-1e6f64..1e6, 1..80),
            seed in any::<u64>(),
        ) {
            let a = compute_numeric_stats(&v.iter().map(|x| Some(*x)).collect::<Vec<_>>()).unwrap();
            use rand::{seq::SliceRandom, SeedableRng};
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = compute_numeric_stats(&v.iter().map(|x| Some(*x)).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.min <= a.q01 && a.q01 <= a.median && a.median <= a.q99 && a.q99 <= a.max);
        }
    }
}
