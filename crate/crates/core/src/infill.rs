//! Missing-value replacement ahead of encoding.
//!
//! The simple strategy fills numeric cells with the train mean and leaves
//! categoric cells as the missing token (vocabulary slot 0). The ml strategy
//! trains one boosted model per feature that had missing train cells, using
//! the other features (simply filled, then default-encoded) as inputs.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{EncodingBasis, FilledColumn};
use crate::categoric::{fit_categoric, fit_vocab, CategoricKind, CategoricParams, VocabOrder};
use crate::error::{Error, Result};
use crate::gbdt::{derive_seed, fit_prepared, BoostedModel, FeatureMatrix, HyperParams, Prepared, Target};
use crate::numeric::{fit_numeric, NumericKind};
use crate::schema::{compute_numeric_stats, FeatureSchema, Role};
use crate::table::{Cell, RawTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InfillStrategy {
    #[default]
    Simple,
    Ml,
}

impl FromStr for InfillStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(InfillStrategy::Simple),
            "ml" => Ok(InfillStrategy::Ml),
            other => Err(Error::InvalidArgument(format!("unknown infill strategy {other:?}"))),
        }
    }
}

/// Learner settings for ml infill models.
pub const ML_INFILL_PARAMS: HyperParams = HyperParams {
    max_depth: 4,
    learning_rate: 0.3,
    rounds: 40,
    min_child_weight: 1.0,
    subsample: 1.0,
    colsample: 1.0,
    l2_lambda: 1.0,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum FeatureInfill {
    Mean {
        fill: f64,
    },
    MissingToken,
    MlRegression {
        model: BoostedModel,
        /// Used when no model input can be built or for rows the model does not cover.
        fallback: f64,
    },
    MlClassifier {
        model: BoostedModel,
        /// Class `k` of the model is `categories[k]`.
        categories: Vec<String>,
    },
    /// Only one category was present at fit time.
    MlConstant {
        category: String,
    },
}

impl FeatureInfill {
    fn simple_numeric_fill(&self) -> Option<f64> {
        match self {
            FeatureInfill::Mean { fill } | FeatureInfill::MlRegression { fallback: fill, .. } => Some(*fill),
            _ => None,
        }
    }

    fn is_model(&self) -> bool {
        matches!(
            self,
            FeatureInfill::MlRegression { .. } | FeatureInfill::MlClassifier { .. } | FeatureInfill::MlConstant { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfillPlan {
    pub name: String,
    pub role: Role,
    pub infill: FeatureInfill,
    /// Features whose encodings feed the model, in column order.
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfillPlan {
    pub strategy: InfillStrategy,
    pub indicators: bool,
    pub features: Vec<FeatureInfillPlan>,
    /// Default encoders for model inputs (ml strategy only), one per feature.
    pub input_encoders: Vec<(String, EncodingBasis)>,
}

/// Raw feature values read under the schema role.
#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<Option<f64>>),
    Categoric(Vec<Option<String>>),
}

impl RawColumn {
    pub fn from_cells(role: Role, cells: &[Cell]) -> Self {
        match role {
            Role::Numeric => RawColumn::Numeric(cells.iter().map(Cell::as_number).collect()),
            _ => RawColumn::Categoric(cells.iter().map(Cell::as_text).collect()),
        }
    }

    pub fn missing_mask(&self) -> Vec<bool> {
        match self {
            RawColumn::Numeric(v) => v.iter().map(Option::is_none).collect(),
            RawColumn::Categoric(v) => v.iter().map(Option::is_none).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfilledTable {
    pub names: Vec<String>,
    pub columns: Vec<FilledColumn>,
    /// `imputed[j][r]` is true where the input cell was missing.
    pub imputed: Vec<Vec<bool>>,
    pub row_count: usize,
}

impl InfilledTable {
    pub fn column(&self, name: &str) -> Option<&FilledColumn> {
        self.names.iter().position(|n| n == name).map(|i| &self.columns[i])
    }

    /// Back to cells; the missing token becomes a missing cell again.
    pub fn to_raw_table(&self) -> Result<RawTable> {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                FilledColumn::Numeric(v) => v.iter().map(|&x| Cell::Number(x)).collect(),
                FilledColumn::Categoric(v) => v
                    .iter()
                    .map(|s| s.as_ref().map_or(Cell::Missing, |s| Cell::Text(s.clone())))
                    .collect(),
            })
            .collect();
        RawTable::new(self.names.clone(), columns)
    }
}

fn read_column(table: &RawTable, name: &str, role: Role) -> Result<RawColumn> {
    let cells = table
        .column(name)
        .ok_or_else(|| Error::ColumnNotFound(name.to_string()))?;
    Ok(RawColumn::from_cells(role, cells))
}

fn simple_fill(column: &RawColumn, numeric_fill: Option<f64>) -> FilledColumn {
    match column {
        RawColumn::Numeric(v) => {
            let fill = numeric_fill.unwrap_or(0.0);
            FilledColumn::Numeric(v.iter().map(|x| x.unwrap_or(fill)).collect())
        }
        RawColumn::Categoric(v) => FilledColumn::Categoric(v.clone()),
    }
}

fn default_encoder(role: Role, filled: &FilledColumn) -> Result<EncodingBasis> {
    Ok(match (role, filled) {
        (Role::Numeric, FilledColumn::Numeric(v)) => {
            let opt: Vec<Option<f64>> = v.iter().copied().map(Some).collect();
            let stats = compute_numeric_stats(&opt)?;
            EncodingBasis::Numeric(fit_numeric(NumericKind::Nmbr, &stats, v)?)
        }
        (Role::HighCardinality, FilledColumn::Categoric(v)) => {
            EncodingBasis::Categoric(fit_categoric(CategoricKind::Hsh2, v, &CategoricParams::default())?)
        }
        (_, FilledColumn::Categoric(v)) => {
            EncodingBasis::Categoric(fit_categoric(CategoricKind::B1010, v, &CategoricParams::default())?)
        }
        _ => return Err(Error::InvalidArgument("role does not match column type".into())),
    })
}

/// Encoded input blocks for the ml models, one block of columns per feature.
fn input_blocks(encoders: &[(String, EncodingBasis)], filled: &[FilledColumn]) -> Result<Vec<Vec<Vec<f64>>>> {
    encoders
        .iter()
        .zip(filled)
        .map(|((_, basis), col)| basis.encode_column(col))
        .collect()
}

fn model_matrix(blocks: &[Vec<Vec<f64>>], skip: usize, rows: &[usize]) -> Result<FeatureMatrix> {
    let columns = blocks
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != skip)
        .flat_map(|(_, b)| b.iter())
        .map(|col| rows.iter().map(|&r| col[r]).collect())
        .collect();
    FeatureMatrix::new(rows.len(), columns)
}

/// Fits infill for every non-label feature of `schema` on `train`.
pub fn plan_infill(
    schema: &[FeatureSchema],
    train: &RawTable,
    strategy: InfillStrategy,
    indicators: bool,
    seed: u64,
) -> Result<InfillPlan> {
    let features: Vec<&FeatureSchema> = schema.iter().filter(|f| f.role != Role::Label).collect();
    let simple: Vec<FeatureInfill> = features
        .iter()
        .map(|f| match f.numeric_stats() {
            Some(stats) if f.role == Role::Numeric => FeatureInfill::Mean { fill: stats.mean },
            _ => FeatureInfill::MissingToken,
        })
        .collect();

    if strategy == InfillStrategy::Simple {
        return Ok(InfillPlan {
            strategy,
            indicators,
            features: features
                .iter()
                .zip(simple)
                .map(|(f, infill)| FeatureInfillPlan {
                    name: f.name.clone(),
                    role: f.role,
                    infill,
                    inputs: Vec::new(),
                })
                .collect(),
            input_encoders: Vec::new(),
        });
    }

    if features.len() < 2 {
        return Err(Error::InfillNeedsFeatures);
    }
    let raw: Vec<RawColumn> = features
        .iter()
        .map(|f| read_column(train, &f.name, f.role))
        .collect::<Result<_>>()?;
    let filled: Vec<FilledColumn> = raw
        .iter()
        .zip(&simple)
        .map(|(c, s)| simple_fill(c, s.simple_numeric_fill()))
        .collect();
    let input_encoders: Vec<(String, EncodingBasis)> = features
        .iter()
        .zip(&filled)
        .map(|(f, col)| Ok((f.name.clone(), default_encoder(f.role, col)?)))
        .collect::<Result<_>>()?;
    let blocks = input_blocks(&input_encoders, &filled)?;

    let mut plans = Vec::with_capacity(features.len());
    for (j, (f, fallback)) in features.iter().zip(simple).enumerate() {
        let missing = raw[j].missing_mask();
        let present: Vec<usize> = (0..missing.len()).filter(|&r| !missing[r]).collect();
        let inputs: Vec<String> = features
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, g)| g.name.clone())
            .collect();
        let no_missing = present.len() == missing.len();
        let input_width: usize = blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, b)| b.len())
            .sum();
        let infill = if no_missing || present.is_empty() || input_width == 0 {
            fallback
        } else {
            let x = model_matrix(&blocks, j, &present)?;
            let data = Prepared::new(&x)?;
            let fit_seed = derive_seed(seed, j as u64);
            match &raw[j] {
                RawColumn::Numeric(v) => {
                    let y: Vec<f64> = present.iter().map(|&r| v[r].expect("present")).collect();
                    let model = fit_prepared(&data, &Target::Continuous(&y), &ML_INFILL_PARAMS, fit_seed, None)?;
                    FeatureInfill::MlRegression {
                        model,
                        fallback: fallback.simple_numeric_fill().unwrap_or(0.0),
                    }
                }
                RawColumn::Categoric(v) => {
                    let values: Vec<Option<&str>> = present.iter().map(|&r| v[r].as_deref()).collect();
                    let vocab = fit_vocab(&values, VocabOrder::Frequency);
                    if vocab.categories().len() == 1 {
                        FeatureInfill::MlConstant {
                            category: vocab.categories()[0].clone(),
                        }
                    } else {
                        let labels: Vec<u32> = values.iter().map(|v| vocab.slot(*v) - 1).collect();
                        let target = Target::Classes {
                            labels: &labels,
                            n_classes: vocab.categories().len(),
                        };
                        let model = fit_prepared(&data, &target, &ML_INFILL_PARAMS, fit_seed, None)?;
                        FeatureInfill::MlClassifier {
                            model,
                            categories: vocab.categories().to_vec(),
                        }
                    }
                }
            }
        };
        plans.push(FeatureInfillPlan {
            name: f.name.clone(),
            role: f.role,
            inputs: if infill.is_model() { inputs } else { Vec::new() },
            infill,
        });
    }
    Ok(InfillPlan {
        strategy,
        indicators,
        features: plans,
        input_encoders,
    })
}

/// Replaces missing cells of every planned feature. Cells that were present
/// are passed through untouched.
pub fn apply_infill(plan: &InfillPlan, table: &RawTable) -> Result<InfilledTable> {
    let raw: Vec<RawColumn> = plan
        .features
        .iter()
        .map(|f| read_column(table, &f.name, f.role))
        .collect::<Result<_>>()?;
    let imputed: Vec<Vec<bool>> = raw.iter().map(RawColumn::missing_mask).collect();
    let mut columns: Vec<FilledColumn> = raw
        .iter()
        .zip(&plan.features)
        .map(|(c, f)| simple_fill(c, f.infill.simple_numeric_fill()))
        .collect();

    let needs_model = plan
        .features
        .iter()
        .zip(&imputed)
        .any(|(f, m)| f.infill.is_model() && m.iter().any(|&b| b));
    if needs_model {
        // inputs are always built from the simply filled columns
        let blocks = input_blocks(&plan.input_encoders, &columns)?;
        for (j, f) in plan.features.iter().enumerate() {
            let rows: Vec<usize> = (0..table.row_count()).filter(|&r| imputed[j][r]).collect();
            if rows.is_empty() || !f.infill.is_model() {
                continue;
            }
            match (&f.infill, &mut columns[j]) {
                (FeatureInfill::MlConstant { category }, FilledColumn::Categoric(col)) => {
                    for &r in &rows {
                        col[r] = Some(category.clone());
                    }
                }
                (FeatureInfill::MlRegression { model, .. }, FilledColumn::Numeric(col)) => {
                    let x = model_matrix(&blocks, j, &rows)?;
                    for (&r, v) in rows.iter().zip(model.predict_values(&x)?) {
                        col[r] = v;
                    }
                }
                (FeatureInfill::MlClassifier { model, categories }, FilledColumn::Categoric(col)) => {
                    let x = model_matrix(&blocks, j, &rows)?;
                    for (&r, k) in rows.iter().zip(model.predict_classes(&x)?) {
                        col[r] = Some(categories[k as usize].clone());
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "infill plan for {} does not match its column",
                        f.name
                    )))
                }
            }
        }
    }
    Ok(InfilledTable {
        names: plan.features.iter().map(|f| f.name.clone()).collect(),
        columns,
        imputed,
        row_count: table.row_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{infer_schema, DEFAULT_CARDINALITY_THRESHOLD};

    fn table(cols: Vec<(&str, Vec<Cell>)>) -> RawTable {
        RawTable::from_columns(cols).unwrap()
    }

    fn schema(t: &RawTable, label: Option<&str>) -> Vec<FeatureSchema> {
        infer_schema(t, label, DEFAULT_CARDINALITY_THRESHOLD).unwrap()
    }

    #[test]
    fn simple_examples() {
        let t = table(vec![
            ("x", vec![1.0.into(), Cell::Missing, 3.0.into()]),
            ("c", vec!["a".into(), Cell::Missing, "a".into()]),
        ]);
        let plan = plan_infill(&schema(&t, None), &t, InfillStrategy::Simple, true, 0).unwrap();
        assert_eq!(plan.features[0].infill, FeatureInfill::Mean { fill: 2.0 });
        assert_eq!(plan.features[1].infill, FeatureInfill::MissingToken);
        let out = apply_infill(&plan, &t).unwrap();
        assert_eq!(out.columns[0], FilledColumn::Numeric(vec![1.0, 2.0, 3.0]));
        assert_eq!(
            out.columns[1],
            FilledColumn::Categoric(vec![Some("a".into()), None, Some("a".into())])
        );
        assert_eq!(out.imputed[0], vec![false, true, false]);
    }

    #[test]
    fn no_missing_is_identity() {
        let t = table(vec![
            ("x", vec![1.0.into(), 5.0.into()]),
            ("c", vec!["a".into(), "b".into()]),
        ]);
        let plan = plan_infill(&schema(&t, None), &t, InfillStrategy::Simple, true, 0).unwrap();
        let out = apply_infill(&plan, &t).unwrap();
        assert_eq!(out.to_raw_table().unwrap(), t);
        assert!(out.imputed.iter().flatten().all(|&b| !b));
    }

    #[test]
    fn ml_needs_two_features() {
        let t = table(vec![
            ("x", vec![1.0.into(), Cell::Missing]),
            ("y", vec!["a".into(), "b".into()]),
        ]);
        let s = schema(&t, Some("y"));
        assert!(matches!(
            plan_infill(&s, &t, InfillStrategy::Ml, false, 0),
            Err(Error::InfillNeedsFeatures)
        ));
    }

    #[test]
    fn ml_fallback_for_feature_without_fit_time_missing() {
        let n = 40;
        let a: Vec<Cell> = (0..n).map(|i| Cell::Number(i as f64)).collect();
        let b: Vec<Cell> = (0..n)
            .map(|i| {
                if i % 10 == 3 {
                    Cell::Missing
                } else {
                    Cell::Number(2.0 * i as f64)
                }
            })
            .collect();
        let t = table(vec![("a", a), ("b", b)]);
        let plan = plan_infill(&schema(&t, None), &t, InfillStrategy::Ml, false, 0).unwrap();
        assert!(matches!(plan.features[0].infill, FeatureInfill::Mean { .. }));
        assert!(matches!(plan.features[1].infill, FeatureInfill::MlRegression { .. }));
        assert_eq!(plan.features[1].inputs, ["a"]);

        let probe = table(vec![
            ("a", vec![Cell::Missing, 5.0.into()]),
            ("b", vec![4.0.into(), Cell::Missing]),
        ]);
        let out = apply_infill(&plan, &probe).unwrap();
        let FilledColumn::Numeric(a) = &out.columns[0] else {
            panic!()
        };
        assert_eq!(a[0], 19.5);
        let FilledColumn::Numeric(b) = &out.columns[1] else {
            panic!()
        };
        assert_eq!(b[0], 4.0);
        assert!((b[1] - 10.0).abs() < 3.0, "{}", b[1]);
    }
}
