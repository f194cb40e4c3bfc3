use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table has no rows or no columns")]
    EmptyTable,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column names must be non-empty")]
    EmptyColumnName,
    #[error("column `{name}` has {actual} rows, expected {expected}")]
    RaggedColumn {
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("column `{0}` not found")]
    ColumnNotFound(String),
    #[error("column `{0}` has no finite values")]
    AllMissing(String),
    #[error("box-cox requires strictly positive values (found {0})")]
    NonPositive(f64),
    #[error("box-cox needs at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("basis is degenerate (zero spread); inverse is ambiguous")]
    DegenerateBasis,
    #[error("encoding `{0}` is not invertible")]
    NotInvertible(&'static str),
    #[error("malformed code: {0}")]
    MalformedCode(String),
    #[error("parsed encoding needs at least 2 unique entries, got {0}")]
    TooFewCategories(usize),
    #[error("ml infill needs at least two features")]
    InfillNeedsFeatures,
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("validation fraction {0} outside [0, 0.5]")]
    InvalidFraction(f64),
    #[error("label column `{0}` is required")]
    LabelMissing(String),
    #[error("label needs at least 2 classes, found {0}")]
    DegenerateLabel(usize),
    #[error("feature `{0}` has no invertible encoding leg")]
    NoInvertibleLeg(String),
    #[error("record format version `{found}` is not supported (expected `{expected}`)")]
    VersionMismatch { found: String, expected: String },
    #[error("corrupt record payload: {0}")]
    CorruptPayload(String),
    #[error("non-finite value in learner input at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("row width {actual} does not match model width {expected}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
