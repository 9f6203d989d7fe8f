use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable x{var} out of range for {n_vars} variables")]
    VarOutOfRange { var: usize, n_vars: usize },
    #[error("assignment has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("restriction term {0} is inconsistent")]
    InconsistentRestriction(String),
    #[error("formula contains the empty term (constant 1); it has no transversals")]
    ConstantTrueFormula,
    #[error("{n_vars} variables exceed the truth-table limit of {limit}")]
    OracleTooLarge { n_vars: usize, limit: usize },
    #[error("term of size {size} exceeds k = {k}")]
    TermTooLarge { size: usize, k: usize },
    #[error("{terms} terms exceed k = {k}")]
    TooManyTerms { terms: usize, k: usize },
    #[error("invalid k = {k}: {reason}")]
    InvalidK { k: usize, reason: String },
    #[error("k = {k} exceeds the number of features ({n_features})")]
    KExceedsFeatures { k: usize, n_features: usize },
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("target column is not binary: {0}")]
    TargetNotBinary(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("missing value in column `{column}` at row {row}")]
    MissingValue { column: String, row: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unknown learner `{0}`")]
    UnknownLearner(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
