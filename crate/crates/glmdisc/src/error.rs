//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Empty or unparsable cell in a data file.
    #[error("missing or unparsable value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    /// Header, kinds, or target domain disagree with the schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// Categorical label never seen by the schema the model was trained on.
    #[error("unknown level {label:?} for feature {feature} at row {row}")]
    UnknownLevel {
        feature: String,
        label: String,
        row: usize,
    },

    /// Categorical code outside the quantizer's domain.
    #[error("level code {code} out of range for a quantizer over {len} levels")]
    LevelOutOfRange { code: usize, len: usize },

    /// A split that would leave train or test empty.
    #[error("split would leave an empty train or test part")]
    DegenerateSplit,

    /// Fitting requires both target classes.
    #[error("target contains a single class")]
    SingleClass,

    /// NaN or infinity reached a numeric routine.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Dimensions disagree between parameters, designs, or datasets.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Structurally invalid quantizer (unsorted cutpoints, non-partition grouping).
    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    /// Model file missing fields or carrying an unsupported format tag.
    #[error("invalid model file: {0}")]
    InvalidModel(String),

    /// Hyperparameter outside its stated range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
