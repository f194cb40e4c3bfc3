//! Fit on a training table, then apply, invert and monitor from the
//! serialized record alone.

mod drift;
mod fit;
mod record;
mod scenario;
mod split;

pub use drift::{drift_report, DriftReport, FeatureDrift, DRIFT_EPS};
pub use fit::{
    apply_pipeline, fit_partitioned, fit_pipeline, fit_record, invert_pipeline, inverted_table, unknown_columns,
    BaselineEntry, EncodedTable, FeatureBases, FitConfig, FitOutput, FittedNode, InvertedColumn, LabelEncoding,
    TransformRecord, FORMAT_VERSION, INDICATOR_SUFFIX,
};
pub use record::{load_record, read_record_path, save_record, write_record_path};
pub use scenario::{
    build_plan, plan_feature, CategoricScenario, EncoderKind, FeaturePlan, NumericScenario, Scenario,
    TransformPlanNode, MAX_PLAN_DEPTH,
};
pub use split::{validation_split, Partition};
