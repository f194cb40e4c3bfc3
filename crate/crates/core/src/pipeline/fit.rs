//! Fitting, applying and inverting a transform record.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::scenario::{build_plan, EncoderKind, FeaturePlan, Scenario, TransformPlanNode};
use super::split::{validation_split, Partition};
use crate::basis::{EncodingBasis, FilledColumn, Recovered};
use crate::categoric::{fit_categoric, CategoricBasis, CategoricKind, CategoricParams};
use crate::error::{Error, Result};
use crate::gbdt::{derive_seed, FeatureMatrix};
use crate::infill::{apply_infill, plan_infill, InfillPlan, InfillStrategy};
use crate::numeric::fit_numeric;
use crate::schema::{
    compute_numeric_stats, infer_schema, FeatureSchema, RawStats, Role, DEFAULT_CARDINALITY_THRESHOLD,
};
use crate::table::{Cell, RawTable};

pub const FORMAT_VERSION: &str = "1";
pub const INDICATOR_SUFFIX: &str = "infill";

const SPLIT_STREAM: u64 = 0x7370_6c69;
const INFILL_STREAM: u64 = 0x696e_666c;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub label: String,
    pub scenario: Scenario,
    pub validation_fraction: f64,
    pub seed: u64,
    pub infill: InfillStrategy,
    pub indicators: bool,
    pub cardinality_threshold: usize,
    pub categoric_params: CategoricParams,
}

impl FitConfig {
    pub fn new(label: impl Into<String>, scenario: Scenario) -> Self {
        Self {
            label: label.into(),
            scenario,
            validation_fraction: 0.25,
            seed: 0,
            infill: InfillStrategy::Simple,
            indicators: false,
            cardinality_threshold: DEFAULT_CARDINALITY_THRESHOLD,
            categoric_params: CategoricParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedNode {
    pub basis: EncodingBasis,
    pub keep_output: bool,
    /// Output column names; empty when the node is not kept.
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBases {
    pub feature: String,
    /// Plan nodes in pre-order.
    pub nodes: Vec<FittedNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEncoding {
    pub name: String,
    /// Ordinal by descending train frequency; code 0 is a missing or unseen label.
    pub basis: CategoricBasis,
}

impl LabelEncoding {
    pub fn classes(&self) -> &[String] {
        self.basis.vocab().map_or(&[], |v| v.categories())
    }

    pub fn encode(&self, value: Option<&str>) -> u32 {
        self.basis.vocab().map_or(0, |v| v.slot(value))
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        self.basis.vocab().and_then(|v| v.category(code))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub feature: String,
    pub stats: RawStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub format_version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub schema: Vec<FeatureSchema>,
    pub plans: Vec<FeaturePlan>,
    pub bases: Vec<FeatureBases>,
    pub infill: InfillPlan,
    pub label: LabelEncoding,
    pub drift_baseline: Vec<BaselineEntry>,
}

impl TransformRecord {
    /// Output column names in order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for fb in &self.bases {
            for node in &fb.nodes {
                names.extend(node.columns.iter().cloned());
            }
            if self.infill.indicators {
                names.push(indicator_name(&fb.feature));
            }
        }
        names
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.bases.iter().map(|b| b.feature.as_str()).collect()
    }

    pub fn n_classes(&self) -> usize {
        self.label.classes().len()
    }
}

fn indicator_name(feature: &str) -> String {
    format!("{feature}_{INDICATOR_SUFFIX}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTable {
    pub column_names: Vec<String>,
    pub matrix: FeatureMatrix,
    /// Ordinal label codes when the label column was present; 0 is missing or unseen.
    pub labels: Option<Vec<u32>>,
    /// Source row of each output row.
    pub row_index: Vec<usize>,
}

impl EncodedTable {
    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    /// Encoded columns followed by the label code column, if any.
    pub fn write_csv<W: Write>(&self, writer: W, label_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.column_names.clone();
        if self.labels.is_some() {
            header.push(label_name.to_string());
        }
        w.write_record(&header)?;
        for r in 0..self.n_rows() {
            let mut fields: Vec<String> = (0..self.matrix.n_cols())
                .map(|j| self.matrix.value(r, j).to_string())
                .collect();
            if let Some(l) = &self.labels {
                fields.push(l[r].to_string());
            }
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by `write_csv`, keeping the columns the record
    /// knows about.
    pub fn read_csv<R: Read>(reader: R, record: &TransformRecord) -> Result<Self> {
        let raw = RawTable::read_csv(reader)?;
        let known: HashSet<String> = record.column_names().into_iter().collect();
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for (name, col) in raw.column_names().iter().zip(raw.columns()) {
            if !known.contains(name) {
                continue;
            }
            let values = col
                .iter()
                .enumerate()
                .map(|(row, c)| {
                    c.as_number().ok_or(Error::NonFinite {
                        row,
                        column: names.len(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            names.push(name.clone());
            columns.push(values);
        }
        let labels = match raw.column(&record.label.name) {
            Some(col) => Some(
                col.iter()
                    .map(|c| {
                        c.as_number()
                            .filter(|v| *v >= 0.0 && v.fract() == 0.0)
                            .map(|v| v as u32)
                    })
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| Error::MalformedCode("label codes must be non-negative integers".into()))?,
            ),
            None => None,
        };
        Ok(EncodedTable {
            column_names: names,
            matrix: FeatureMatrix::new(raw.row_count(), columns)?,
            labels,
            row_index: (0..raw.row_count()).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub train: EncodedTable,
    pub validation: EncodedTable,
    pub record: TransformRecord,
    pub partition: Partition,
    pub warnings: Vec<String>,
}

fn label_values(table: &RawTable, label: &str) -> Result<Vec<String>> {
    let col = table
        .column(label)
        .ok_or_else(|| Error::LabelMissing(label.to_string()))?;
    col.iter()
        .enumerate()
        .map(|(r, c)| {
            c.as_text()
                .ok_or_else(|| Error::InvalidArgument(format!("label `{label}` is missing at row {r}")))
        })
        .collect()
}

/// Splits off a stratified validation partition, then fits everything on the
/// remaining rows.
pub fn fit_pipeline(table: &RawTable, config: &FitConfig) -> Result<FitOutput> {
    if !(0.0..=0.5).contains(&config.validation_fraction) {
        return Err(Error::InvalidFraction(config.validation_fraction));
    }
    let labels = label_values(table, &config.label)?;
    let partition = validation_split(
        &labels,
        config.validation_fraction,
        derive_seed(config.seed, SPLIT_STREAM),
    )?;
    let mut warnings = Vec::new();
    if !partition.stratified {
        warnings.push(format!(
            "label `{}` has a single class; validation split is unstratified",
            config.label
        ));
    }
    let train_part = table.select_rows(&partition.train);
    let valid_part = table.select_rows(&partition.validation);
    let (record, mut train, mut validation) = fit_partitioned(&train_part, &valid_part, config)?;
    train.row_index = partition.train.clone();
    validation.row_index = partition.validation.clone();
    Ok(FitOutput {
        train,
        validation,
        record,
        partition,
        warnings,
    })
}

/// Fits on `train` alone and encodes both partitions on that basis.
pub fn fit_partitioned(
    train: &RawTable,
    validation: &RawTable,
    config: &FitConfig,
) -> Result<(TransformRecord, EncodedTable, EncodedTable)> {
    let record = fit_record(train, config)?;
    let train_encoded = apply_pipeline(&record, train)?;
    let valid_encoded = apply_pipeline(&record, validation)?;
    Ok((record, train_encoded, valid_encoded))
}

fn fit_node(
    node: &TransformPlanNode,
    feature: &str,
    column: &FilledColumn,
    params: &CategoricParams,
    out: &mut Vec<FittedNode>,
) -> Result<()> {
    let basis = match (node.kind, column) {
        (EncoderKind::Numeric(kind), FilledColumn::Numeric(values)) => {
            let opt: Vec<Option<f64>> = values.iter().copied().map(Some).collect();
            let stats = compute_numeric_stats(&opt).map_err(|_| Error::AllMissing(feature.to_string()))?;
            EncodingBasis::Numeric(fit_numeric(kind, &stats, values)?)
        }
        (EncoderKind::Categoric(kind), FilledColumn::Categoric(values)) => {
            EncodingBasis::Categoric(fit_categoric(kind, values, params)?)
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "encoder {} does not fit feature `{feature}`",
                node.kind.code()
            )))
        }
    };
    let columns = if node.keep_output {
        basis
            .column_suffixes()
            .into_iter()
            .map(|s| format!("{feature}_{s}"))
            .collect()
    } else {
        Vec::new()
    };
    out.push(FittedNode {
        basis,
        keep_output: node.keep_output,
        columns,
    });
    for child in &node.children {
        fit_node(child, feature, column, params, out)?;
    }
    Ok(())
}

/// Everything needed to apply, invert and monitor, learned from `train` only.
pub fn fit_record(train: &RawTable, config: &FitConfig) -> Result<TransformRecord> {
    let labels = label_values(train, &config.label)?;
    let schema = infer_schema(train, Some(&config.label), config.cardinality_threshold)?;
    let plans = build_plan(&schema, config.scenario);
    for p in &plans {
        p.root.validate()?;
    }
    let infill = plan_infill(
        &schema,
        train,
        config.infill,
        config.indicators,
        derive_seed(config.seed, INFILL_STREAM),
    )?;
    let filled = apply_infill(&infill, train)?;

    let mut bases = Vec::new();
    for plan in plans.iter().filter(|p| p.role != Role::Label) {
        let column = filled
            .column(&plan.feature)
            .expect("infill covers every non-label feature");
        let mut nodes = Vec::new();
        fit_node(&plan.root, &plan.feature, column, &config.categoric_params, &mut nodes)?;
        bases.push(FeatureBases {
            feature: plan.feature.clone(),
            nodes,
        });
    }

    let label_values: Vec<Option<&str>> = labels.iter().map(|s| Some(s.as_str())).collect();
    let label = LabelEncoding {
        name: config.label.clone(),
        basis: fit_categoric(CategoricKind::Ord3, &label_values, &config.categoric_params)?,
    };

    let record = TransformRecord {
        format_version: FORMAT_VERSION.to_string(),
        scenario: config.scenario,
        seed: config.seed,
        drift_baseline: schema
            .iter()
            .map(|f| BaselineEntry {
                feature: f.name.clone(),
                stats: f.raw_stats.clone(),
            })
            .collect(),
        schema,
        plans,
        bases,
        infill,
        label,
    };
    let names = record.column_names();
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) || *n == config.label {
            return Err(Error::DuplicateColumn(n.clone()));
        }
    }
    Ok(record)
}

/// Input columns the record does not use.
pub fn unknown_columns(record: &TransformRecord, table: &RawTable) -> Vec<String> {
    let known: HashSet<&str> = record.schema.iter().map(|f| f.name.as_str()).collect();
    table
        .column_names()
        .iter()
        .filter(|n| !known.contains(n.as_str()))
        .cloned()
        .collect()
}

/// Encodes `table` on the record's basis. Every non-label schema feature
/// must be present; the label is optional and extra columns are ignored.
pub fn apply_pipeline(record: &TransformRecord, table: &RawTable) -> Result<EncodedTable> {
    let filled = apply_infill(&record.infill, table)?;
    let mut columns = Vec::new();
    for (j, fb) in record.bases.iter().enumerate() {
        let col = filled
            .column(&fb.feature)
            .ok_or_else(|| Error::ColumnNotFound(fb.feature.clone()))?;
        for node in fb.nodes.iter().filter(|n| n.keep_output) {
            columns.extend(node.basis.encode_column(col)?);
        }
        if record.infill.indicators {
            columns.push(filled.imputed[j].iter().map(|&m| if m { 1.0 } else { 0.0 }).collect());
        }
    }
    let labels = table.column(&record.label.name).map(|col| {
        col.iter()
            .map(|c| record.label.encode(c.as_text().as_deref()))
            .collect()
    });
    let matrix = FeatureMatrix::new(table.row_count(), columns)?;
    matrix.check_finite()?;
    Ok(EncodedTable {
        column_names: record.column_names(),
        matrix,
        labels,
        row_index: (0..table.row_count()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedColumn {
    pub feature: String,
    /// Code of the encoder leg the values were read from.
    pub leg: &'static str,
    pub values: Vec<Recovered>,
    /// Where indicator columns were emitted: true for rows that were infilled.
    pub infilled: Option<Vec<bool>>,
}

impl InvertedColumn {
    pub fn cells(&self) -> Vec<Cell> {
        self.values
            .iter()
            .map(|v| match v {
                Recovered::Number { value, .. } => Cell::Number(*value),
                Recovered::Category(Some(s)) => Cell::Text(s.clone()),
                Recovered::Category(None) => Cell::Missing,
            })
            .collect()
    }
}

/// Recovers pre-encoding values for `features` from the first kept,
/// invertible encoder leg of each. The label name decodes the label codes.
pub fn invert_pipeline(
    record: &TransformRecord,
    encoded: &EncodedTable,
    features: &[&str],
) -> Result<Vec<InvertedColumn>> {
    features
        .iter()
        .map(|&feature| {
            if feature == record.label.name {
                let codes = encoded
                    .labels
                    .as_ref()
                    .ok_or_else(|| Error::ColumnNotFound(feature.to_string()))?;
                return Ok(InvertedColumn {
                    feature: feature.to_string(),
                    leg: CategoricKind::Ord3.code(),
                    values: codes
                        .iter()
                        .map(|&c| Recovered::Category(record.label.decode(c).map(str::to_string)))
                        .collect(),
                    infilled: None,
                });
            }
            let fb = record
                .bases
                .iter()
                .find(|b| b.feature == feature)
                .ok_or_else(|| Error::ColumnNotFound(feature.to_string()))?;
            let node = fb
                .nodes
                .iter()
                .find(|n| n.keep_output && n.basis.is_invertible())
                .ok_or_else(|| Error::NoInvertibleLeg(feature.to_string()))?;
            let idx: Vec<usize> = node
                .columns
                .iter()
                .map(|c| encoded.column_index(c).ok_or_else(|| Error::ColumnNotFound(c.clone())))
                .collect::<Result<_>>()?;
            let mut code = Vec::with_capacity(idx.len());
            let values = (0..encoded.n_rows())
                .map(|r| {
                    code.clear();
                    code.extend(idx.iter().map(|&j| encoded.matrix.value(r, j)));
                    node.basis.invert(&code)
                })
                .collect::<Result<_>>()?;
            let infilled = encoded
                .column_index(&indicator_name(feature))
                .filter(|_| record.infill.indicators)
                .map(|j| encoded.matrix.column(j).iter().map(|&v| v == 1.0).collect());
            Ok(InvertedColumn {
                feature: feature.to_string(),
                leg: node.basis.code(),
                values,
                infilled,
            })
        })
        .collect()
}

/// Recovered columns as a table, in request order.
pub fn inverted_table(columns: &[InvertedColumn]) -> Result<RawTable> {
    RawTable::new(
        columns.iter().map(|c| c.feature.clone()).collect(),
        columns.iter().map(InvertedColumn::cells).collect(),
    )
}
