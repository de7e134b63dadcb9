//! Machine-readable run report. The layout is documented in `docs/report.schema.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::AugmentSummary;
use crate::error::Result;
use crate::impute::ImputeSummary;
use crate::ks::KsResult;
use crate::metric::FeatureScore;
use crate::outlier::OutlierSummary;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub outliers: OutlierSummary,
    pub imputation: ImputeSummary,
    pub augmentation: AugmentationSection,
    pub importance: ImportanceSection,
    pub ks: PerEvaluation<Vec<KsEntry>>,
    pub scores: PerEvaluation<ScoreSection>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSection {
    pub enabled: bool,
    #[serde(flatten)]
    pub summary: AugmentSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSection {
    pub weights: Vec<f64>,
    pub feature_names: Vec<String>,
    pub n_trees: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerEvaluation<T> {
    pub imputation: Option<T>,
    pub augmentation: Option<T>,
}

impl<T> Default for PerEvaluation<T> {
    fn default() -> Self {
        PerEvaluation {
            imputation: None,
            augmentation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub feature: usize,
    pub name: String,
    #[serde(flatten)]
    pub result: KsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSection {
    pub features: Vec<FeatureScore>,
    pub ks_global: f64,
    pub xgewfi: f64,
    /// Feature indices by weighted error, largest first.
    pub ranking: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub outliers_injected: usize,
    pub missing_injected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub generator: Option<u64>,
    pub corrupt: Option<u64>,
    pub augment: Option<u64>,
    pub forest: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    pub schema_version: String,
    pub master_seed: u64,
    pub seeds: StageSeeds,
    pub corruption: Option<CorruptionRecord>,
    /// Which table the importance forest was fitted on.
    pub forest_trained_on: String,
    pub timestamp: String,
}

pub fn render_json(report: &Report) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

pub fn json_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_json(report)?)?;
    Ok(())
}
