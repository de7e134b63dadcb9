//! End-to-end run: input → corruption → outlier nulling → imputation →
//! augmentation → forest importances → per-feature KS → xGEWFI → reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{augment, AugmentConfig, AugmentSummary};
use crate::corrupt::{corrupt, CorruptConfig};
use crate::dataset::{load_csv, Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::forest::{train, ForestConfig, ImportanceVector};
use crate::impute::{impute, ImputeConfig};
use crate::ks::{ks_two_sample, KsResult};
use crate::metric::{rank_features, score, FeatureScore, GlobalScores};
use crate::outlier::null_outliers;
use crate::report::json::{
    AugmentationSection, CorruptionRecord, ImportanceSection, KsEntry, PerEvaluation, Provenance,
    ScoreSection, StageSeeds, SCHEMA_VERSION,
};
use crate::report::{self, HistogramSpec, Report, ReportBundle};
use crate::rng::derive_seed;
use crate::synthgen::{generate, GenConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum InputSpec {
    Generate { kind: DatasetKind, generator: GenConfig },
    Load { path: PathBuf, kind: DatasetKind },
}

impl InputSpec {
    pub fn kind(&self) -> DatasetKind {
        match self {
            InputSpec::Generate { kind, .. } | InputSpec::Load { kind, .. } => *kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluate {
    Imputation,
    Augmentation,
    Both,
}

impl std::str::FromStr for Evaluate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "imputation" => Ok(Evaluate::Imputation),
            "augmentation" => Ok(Evaluate::Augmentation),
            "both" => Ok(Evaluate::Both),
            other => Err(Error::Config(format!("unknown evaluation mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationMode {
    Imputation,
    Augmentation,
}

impl Evaluate {
    pub fn modes(self) -> Vec<EvaluationMode> {
        match self {
            Evaluate::Imputation => vec![EvaluationMode::Imputation],
            Evaluate::Augmentation => vec![EvaluationMode::Augmentation],
            Evaluate::Both => vec![EvaluationMode::Imputation, EvaluationMode::Augmentation],
        }
    }
}

/// Fully resolved run configuration; every stage seed is concrete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub input: InputSpec,
    pub corrupt: Option<CorruptConfig>,
    pub impute: ImputeConfig,
    pub augment: Option<AugmentConfig>,
    pub forest: ForestConfig,
    pub evaluate: Evaluate,
    pub out_dir: PathBuf,
    pub percent_display: bool,
}

/// Seed of a named stage under the master seed.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    derive_seed(master, stage)
}

impl PipelineConfig {
    /// Defaults with every stage seed derived from `seed`. A generated input
    /// uses `seed` itself as its `random_state`.
    pub fn new(seed: u64, mut input: InputSpec, out_dir: impl Into<PathBuf>) -> Self {
        if let InputSpec::Generate { generator, .. } = &mut input {
            generator.random_state = seed;
        }
        PipelineConfig {
            seed,
            input,
            corrupt: None,
            impute: ImputeConfig::default(),
            augment: None,
            forest: ForestConfig {
                seed: stage_seed(seed, "forest"),
                ..ForestConfig::default()
            },
            evaluate: Evaluate::Imputation,
            out_dir: out_dir.into(),
            percent_display: false,
        }
    }

    pub fn with_corruption(mut self) -> Self {
        self.corrupt = Some(CorruptConfig {
            seed: stage_seed(self.seed, "corrupt"),
            ..CorruptConfig::default()
        });
        self
    }

    pub fn with_augmentation(mut self, target_ratio: f64) -> Self {
        self.augment = Some(AugmentConfig {
            target_ratio,
            seed: stage_seed(self.seed, "augment"),
            ..AugmentConfig::default()
        });
        self
    }

    fn validate(&self) -> Result<()> {
        if self.evaluate != Evaluate::Imputation && self.augment.is_none() {
            return Err(Error::Config(
                "evaluating augmentation requires an augmentation configuration".into(),
            ));
        }
        Ok(())
    }
}

/// Scores of one evaluation mode.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub mode: EvaluationMode,
    pub ks: Vec<KsResult>,
    pub scores: Vec<FeatureScore>,
    pub globals: GlobalScores,
    pub ranking: Vec<usize>,
    pub histograms: Vec<HistogramSpec>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub bundle: ReportBundle,
    pub evaluations: Vec<Evaluation>,
    pub importances: ImportanceVector,
    pub feature_names: Vec<String>,
}

/// Original and generated values of every feature for one evaluation mode.
type Slices = Vec<(Vec<f64>, Vec<f64>)>;

fn imputation_slices(before: &Dataset, after: &Dataset) -> Slices {
    (0..before.n_features())
        .map(|f| {
            let mut original = Vec::new();
            let mut generated = Vec::new();
            for r in 0..before.n_rows() {
                match before.value(r, f) {
                    Some(v) => original.push(v),
                    None => generated.extend(after.value(r, f)),
                }
            }
            (original, generated)
        })
        .collect()
}

fn augmentation_slices(before: &Dataset, after: &Dataset, summary: &AugmentSummary) -> Slices {
    (0..before.n_features())
        .map(|f| {
            let original = before.raw_column(f).to_vec();
            let generated = summary
                .generated_ranges
                .iter()
                .flat_map(|range| range.clone().map(|r| after.raw_column(f)[r]))
                .collect();
            (original, generated)
        })
        .collect()
}

/// A feature with nothing generated contributes a zero error.
fn ks_for(original: &[f64], generated: &[f64]) -> Result<KsResult> {
    if generated.is_empty() {
        return Ok(KsResult {
            d_statistic: 0.0,
            p_value: 1.0,
            n_original: original.len(),
            n_generated: 0,
        });
    }
    ks_two_sample(original, generated)
}

fn file_suffix(mode: EvaluationMode, evaluate: Evaluate) -> &'static str {
    match (evaluate, mode) {
        (Evaluate::Both, EvaluationMode::Augmentation) => "_augmentation",
        _ => "",
    }
}

fn load_input(input: &InputSpec) -> Result<Dataset> {
    match input {
        InputSpec::Generate { kind, generator } => generate(*kind, generator),
        InputSpec::Load { path, kind } => load_csv(path, *kind),
    }
}

pub fn run(config: &PipelineConfig) -> Result<RunOutcome> {
    config.validate()?;
    let raw = load_input(&config.input).map_err(Error::in_stage("input"))?;
    let names = raw.feature_names().to_vec();

    let (input, corruption) = match &config.corrupt {
        Some(cfg) => {
            let c = corrupt(&raw, cfg).map_err(Error::in_stage("corrupt"))?;
            let record = CorruptionRecord {
                outliers_injected: c.outliers.iter().map(Vec::len).sum(),
                missing_injected: c.missing.iter().map(Vec::len).sum(),
            };
            (c.dataset, Some(record))
        }
        None => (raw, None),
    };
    let wants_imputation = config.evaluate != Evaluate::Augmentation;
    if wants_imputation && config.corrupt.is_none() && !input.has_missing() {
        return Err(Error::Config(
            "imputation evaluation needs missing cells: the input is complete and corruption is disabled".into(),
        ));
    }

    let (nulled, outlier_summary) = null_outliers(&input).map_err(Error::in_stage("outliers"))?;
    if wants_imputation && !nulled.has_missing() {
        return Err(Error::Config(
            "imputation evaluation needs missing cells, none remain after outlier detection".into(),
        ));
    }
    let (imputed, impute_summary) =
        impute(&nulled, &config.impute).map_err(Error::in_stage("imputation"))?;

    let (augmented, augment_summary) = match &config.augment {
        Some(cfg) => augment(&imputed, cfg).map_err(Error::in_stage("augmentation"))?,
        None => (imputed.clone(), AugmentSummary::empty(&imputed, &AugmentConfig::default())),
    };

    let forest = train(&imputed, &config.forest).map_err(Error::in_stage("forest"))?;
    let importances = forest.feature_importances().map_err(Error::in_stage("forest"))?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::in_stage("report")(e.into()))?;
    let out = |name: String| config.out_dir.join(name);
    let mut bundle = ReportBundle {
        json_path: out("report.json".into()),
        ..ReportBundle::default()
    };

    let boxplot = out("boxplot.svg".into());
    report::boxplot_svg(&input, &boxplot).map_err(Error::in_stage("report"))?;
    bundle.svg_paths.push(boxplot);

    let mut evaluations = Vec::new();
    let mut ks_section = PerEvaluation::default();
    let mut score_section = PerEvaluation::default();
    for mode in config.evaluate.modes() {
        let slices = match mode {
            EvaluationMode::Imputation => imputation_slices(&nulled, &imputed),
            EvaluationMode::Augmentation => augmentation_slices(&imputed, &augmented, &augment_summary),
        };
        let ks = slices
            .iter()
            .map(|(o, g)| ks_for(o, g))
            .collect::<Result<Vec<_>>>()
            .map_err(Error::in_stage("evaluation"))?;
        let (scores, globals) = score(&importances, &ks).map_err(Error::in_stage("evaluation"))?;
        let ranking = rank_features(&scores);

        let suffix = file_suffix(mode, config.evaluate);
        let mut histograms = Vec::new();
        for (f, (original, generated)) in slices.iter().enumerate() {
            let path = out(format!("hist{suffix}_{f}.svg"));
            let spec = report::histogram_svg(original, generated, f, &names[f], &path)
                .map_err(Error::in_stage("report"))?;
            histograms.push(spec);
            bundle.svg_paths.push(path);
        }
        let combined = out(format!("combined{suffix}.svg"));
        report::combined_chart_svg(&scores, &names, &combined).map_err(Error::in_stage("report"))?;
        bundle.svg_paths.push(combined);
        let results = out(format!("results{suffix}.tex"));
        let explain = out(format!("explain{suffix}.tex"));
        report::latex_tables(&scores, &globals, config.percent_display, &results, &explain)
            .map_err(Error::in_stage("report"))?;
        bundle.latex_results_paths.push(results);
        bundle.latex_explain_paths.push(explain);

        let entries: Vec<KsEntry> = ks
            .iter()
            .enumerate()
            .map(|(f, r)| KsEntry {
                feature: f,
                name: names[f].clone(),
                result: *r,
            })
            .collect();
        let section = ScoreSection {
            features: scores.clone(),
            ks_global: globals.ks_global,
            xgewfi: globals.xgewfi,
            ranking: ranking.clone(),
        };
        match mode {
            EvaluationMode::Imputation => {
                ks_section.imputation = Some(entries);
                score_section.imputation = Some(section);
            }
            EvaluationMode::Augmentation => {
                ks_section.augmentation = Some(entries);
                score_section.augmentation = Some(section);
            }
        }
        evaluations.push(Evaluation {
            mode,
            ks,
            scores,
            globals,
            ranking,
            histograms,
        });
    }

    let report = Report {
        schema_version: SCHEMA_VERSION.into(),
        config: report_config(config)?,
        outliers: outlier_summary,
        imputation: impute_summary,
        augmentation: AugmentationSection {
            enabled: config.augment.is_some(),
            summary: augment_summary,
        },
        importance: ImportanceSection {
            weights: importances.weights().to_vec(),
            feature_names: names.clone(),
            n_trees: config.forest.n_trees,
        },
        ks: ks_section,
        scores: score_section,
        provenance: Provenance {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION.into(),
            master_seed: config.seed,
            seeds: StageSeeds {
                generator: match &config.input {
                    InputSpec::Generate { generator, .. } => Some(generator.random_state),
                    InputSpec::Load { .. } => None,
                },
                corrupt: config.corrupt.as_ref().map(|c| c.seed),
                augment: config.augment.as_ref().map(|a| a.seed),
                forest: config.forest.seed,
            },
            corruption,
            forest_trained_on: "imputed table before augmentation".into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
    };
    report::json_report(&report, &bundle.json_path).map_err(Error::in_stage("report"))?;

    Ok(RunOutcome {
        report,
        bundle,
        evaluations,
        importances,
        feature_names: names,
    })
}

/// The run configuration minus the output location, so reports written to
/// different directories stay comparable.
fn report_config(config: &PipelineConfig) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(config)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("out_dir");
    }
    Ok(value)
}

/// Masks the timestamp so two reports can be compared byte for byte.
pub fn mask_timestamp(json: &str) -> String {
    json.lines()
        .map(|line| {
            if line.trim_start().starts_with("\"timestamp\":") {
                let indent = &line[..line.len() - line.trim_start().len()];
                format!("{indent}\"timestamp\": \"<masked>\"")
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Writes the clean dataset an `InputSpec::Generate` would produce.
pub fn write_generated(kind: DatasetKind, cfg: &GenConfig, path: &Path) -> Result<Dataset> {
    let ds = generate(kind, cfg)?;
    crate::dataset::save_csv(&ds, path)?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: DatasetKind, dir: &Path) -> PipelineConfig {
        let input = InputSpec::Generate {
            kind,
            generator: GenConfig {
                n_samples: 300,
                ..GenConfig::default()
            },
        };
        let mut cfg = PipelineConfig::new(7, input, dir).with_corruption();
        cfg.forest.n_trees = 10;
        cfg
    }

    #[test]
    fn complete_input_without_corruption_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(DatasetKind::Regression, dir.path());
        cfg.corrupt = None;
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert_eq!(err.category().exit_code(), 1);
    }

    #[test]
    fn augmentation_needs_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(DatasetKind::Classification, dir.path());
        cfg.evaluate = Evaluate::Augmentation;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn both_modes_write_suffixed_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(DatasetKind::Classification, dir.path()).with_augmentation(1.5);
        cfg.evaluate = Evaluate::Both;
        let outcome = run(&cfg).unwrap();
        assert_eq!(outcome.evaluations.len(), 2);
        for name in ["combined.svg", "combined_augmentation.svg", "explain_augmentation.tex", "hist_augmentation_4.svg", "hist_0.svg"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        assert!(outcome.bundle.all_paths().all(|p| p.exists()));
        assert!(outcome.report.scores.imputation.is_some());
        assert!(outcome.report.scores.augmentation.is_some());
    }

    #[test]
    fn imputation_slices_split_observed_and_filled() {
        let before = Dataset::new(
            vec![vec![1.0, 0.0, 3.0]],
            vec![vec![false, true, false]],
            vec![0.0; 3],
            DatasetKind::Regression,
            Dataset::default_names(1),
        )
        .unwrap();
        let after = Dataset::complete(vec![vec![1.0, 2.0, 3.0]], vec![0.0; 3], DatasetKind::Regression, Dataset::default_names(1))
            .unwrap();
        let slices = imputation_slices(&before, &after);
        assert_eq!(slices[0], (vec![1.0, 3.0], vec![2.0]));
    }

    #[test]
    fn stage_errors_keep_their_category() {
        let dir = tempfile::tempdir().unwrap();
        let input = InputSpec::Load {
            path: dir.path().join("absent.csv"),
            kind: DatasetKind::Regression,
        };
        let cfg = PipelineConfig::new(1, input, dir.path());
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "input", .. }), "{err}");
        assert_eq!(err.category().exit_code(), 3);
    }

    #[test]
    fn timestamp_mask() {
        let json = "{\n  \"a\": 1,\n    \"timestamp\": \"2026-01-01T00:00:00Z\"\n}";
        assert_eq!(mask_timestamp(json), "{\n  \"a\": 1,\n    \"timestamp\": \"<masked>\"\n}");
    }
}
