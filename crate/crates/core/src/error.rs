use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used to pick a process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Config => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Io => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed CSV at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("non-numeric value {value:?} at line {line}, column {column}")]
    NonNumeric {
        line: u64,
        column: usize,
        value: String,
    },

    #[error("missing target value at line {line}")]
    MissingTarget { line: u64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },

    #[error("feature {name:?} (index {feature}) has no observed values")]
    EmptyFeature { feature: usize, name: String },

    #[error("sample is empty")]
    EmptySample,

    #[error("row width {got} does not match expected width {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("class {class} has {size} rows, at least k + 1 = {required} are needed")]
    ClassTooSmall {
        class: usize,
        size: usize,
        required: usize,
    },

    #[error("augmentation pool has {size} rows, at least k + 1 = {required} are needed")]
    PoolTooSmall { size: usize, required: usize },

    #[error("dataset has {0} rows, at least 2 are needed to train")]
    TooFewRows(usize),

    #[error("target is constant, no split is possible")]
    ConstantTarget,

    #[error("forest contains no informative split")]
    NoSplits,

    #[error("original sample of feature {feature} has zero variance")]
    ZeroVariance { feature: usize },

    #[error("length mismatch: {importances} importances but {ks_results} KS results")]
    LengthMismatch {
        importances: usize,
        ks_results: usize,
    },

    #[error("invalid importance vector: {0}")]
    InvalidImportance(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Io(_) => ErrorCategory::Io,
            Error::Json(e) if e.is_io() => ErrorCategory::Io,
            Error::Stage { source, .. } => source.category(),
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| match source {
            // keep the innermost stage name
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
