//! Evaluation of data imputation and augmentation by per-feature
//! Kolmogorov–Smirnov errors weighted with random-forest feature importances,
//! together with the preprocessing stages that produce the data under test:
//! IQR outlier removal, KNN imputation and SMOTE oversampling.

pub mod augment;
pub mod corrupt;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod impute;
pub mod ks;
pub mod metric;
pub mod outlier;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod synthgen;

pub use dataset::{load_csv, save_csv, ColumnView, Dataset, DatasetKind};
pub use error::{Error, ErrorCategory, Result};
pub use forest::{Forest, ForestConfig, ImportanceVector, MaxFeatures};
pub use ks::{ks_two_sample, KsResult};
pub use metric::{rank_features, score, FeatureScore, GlobalScores};
pub use pipeline::{run, Evaluate, InputSpec, PipelineConfig, RunOutcome};
