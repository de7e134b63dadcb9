//! Resolution of the run configuration: defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use xgewfi::corrupt::CorruptConfig;
use xgewfi::pipeline::stage_seed;
use xgewfi::synthgen::GenConfig;
use xgewfi::{DatasetKind, Error, Evaluate, InputSpec, MaxFeatures, PipelineConfig, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub kind: Option<DatasetKind>,
    pub generator: Option<GeneratorFile>,
    pub corrupt: Option<CorruptFile>,
    pub impute: Option<ImputeFile>,
    pub augment: Option<AugmentFile>,
    pub forest: Option<ForestFile>,
    pub evaluate: Option<Evaluate>,
    pub out_dir: Option<PathBuf>,
    pub percent_display: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub n_samples: Option<usize>,
    pub n_features: Option<usize>,
    pub n_informative: Option<usize>,
    pub n_classes: Option<usize>,
    pub shuffle: Option<bool>,
    pub noise: Option<f64>,
    pub random_state: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptFile {
    pub enabled: Option<bool>,
    pub outlier_rate: Option<f64>,
    pub missing_rate: Option<f64>,
    pub outlier_magnitude: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputeFile {
    pub k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentFile {
    pub k: Option<usize>,
    pub target_ratio: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestFile {
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub max_features: Option<MaxFeatures>,
    pub bootstrap: Option<bool>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Number of rows to generate
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub n_features: Option<usize>,
    /// Defaults to max(1, n_features - 2)
    #[arg(long)]
    pub n_informative: Option<usize>,
    #[arg(long)]
    pub n_classes: Option<usize>,
    /// Keep generation order instead of shuffling rows
    #[arg(long)]
    pub no_shuffle: bool,
    /// Standard deviation of regression target noise
    #[arg(long)]
    pub noise: Option<f64>,
    /// Generator seed; defaults to the master seed
    #[arg(long)]
    pub random_state: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// JSON configuration file; flags take precedence over it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed every stage seed is derived from
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inject outliers and missing cells before evaluation
    #[arg(long, conflicts_with = "no_corrupt")]
    pub corrupt: bool,
    /// Skip corruption
    #[arg(long)]
    pub no_corrupt: bool,
    #[arg(long)]
    pub outlier_rate: Option<f64>,
    #[arg(long)]
    pub missing_rate: Option<f64>,
    /// Outlier distance from the mean, in standard deviations
    #[arg(long)]
    pub outlier_magnitude: Option<f64>,
    #[arg(long)]
    pub corrupt_seed: Option<u64>,
    /// Neighbours used by KNN imputation
    #[arg(long)]
    pub k_impute: Option<usize>,
    /// Neighbours used by SMOTE augmentation
    #[arg(long)]
    pub k_augment: Option<usize>,
    /// Growth ratio for augmentation; enables augmentation
    #[arg(long)]
    pub target_ratio: Option<f64>,
    #[arg(long)]
    pub augment_seed: Option<u64>,
    /// imputation, augmentation or both
    #[arg(long)]
    pub evaluate: Option<String>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    /// sqrt, third or all
    #[arg(long)]
    pub max_features: Option<String>,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub forest_seed: Option<u64>,
    /// Directory receiving report.json, the LaTeX tables and the SVG charts
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Display weighted errors and xGEWFI multiplied by 100
    #[arg(long)]
    pub percent: bool,
}

/// Where the data comes from, before defaults are applied.
pub enum Source<'a> {
    Generate(&'a GeneratorArgs),
    Load(PathBuf),
}

pub fn resolve(
    source: Source<'_>,
    kind_flag: Option<DatasetKind>,
    args: &PipelineArgs,
) -> Result<PipelineConfig> {
    let file = match &args.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let kind = kind_flag
        .or(file.kind)
        .ok_or_else(|| Error::Config("dataset kind is required (--kind)".into()))?;
    let out_dir = args
        .out_dir
        .clone()
        .or(file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("xgewfi-out"));

    let generating = matches!(source, Source::Generate(_));
    let generator = match &source {
        Source::Generate(gen) => Some(generator_config(gen, file.generator.as_ref(), seed)),
        Source::Load(_) => None,
    };
    let input = match source {
        Source::Generate(_) => InputSpec::Generate {
            kind,
            generator: GenConfig::default(),
        },
        Source::Load(path) => InputSpec::Load { path, kind },
    };
    let mut cfg = PipelineConfig::new(seed, input, out_dir);
    if let (InputSpec::Generate { generator: slot, .. }, Some(g)) = (&mut cfg.input, generator) {
        *slot = g;
    }

    // corruption: on by default for generated data, off for loaded data
    let file_corrupt = file.corrupt.as_ref();
    let rates_given = args.outlier_rate.is_some()
        || args.missing_rate.is_some()
        || args.outlier_magnitude.is_some()
        || args.corrupt_seed.is_some();
    let enabled = if args.no_corrupt {
        false
    } else if args.corrupt || rates_given {
        true
    } else if let Some(fc) = file_corrupt {
        fc.enabled.unwrap_or(true)
    } else {
        generating
    };
    if enabled {
        let mut c = CorruptConfig {
            seed: stage_seed(seed, "corrupt"),
            ..CorruptConfig::default()
        };
        if let Some(fc) = file_corrupt {
            c.outlier_rate = fc.outlier_rate.unwrap_or(c.outlier_rate);
            c.missing_rate = fc.missing_rate.unwrap_or(c.missing_rate);
            c.outlier_magnitude = fc.outlier_magnitude.unwrap_or(c.outlier_magnitude);
            c.seed = fc.seed.unwrap_or(c.seed);
        }
        c.outlier_rate = args.outlier_rate.unwrap_or(c.outlier_rate);
        c.missing_rate = args.missing_rate.unwrap_or(c.missing_rate);
        c.outlier_magnitude = args.outlier_magnitude.unwrap_or(c.outlier_magnitude);
        c.seed = args.corrupt_seed.unwrap_or(c.seed);
        cfg.corrupt = Some(c);
    }

    if let Some(k) = args.k_impute.or(file.impute.as_ref().and_then(|i| i.k)) {
        cfg.impute.k = k;
    }

    let file_augment = file.augment.as_ref();
    let ratio = args.target_ratio.or(file_augment.and_then(|a| a.target_ratio));
    if ratio.is_some() || file_augment.is_some() || args.k_augment.is_some() || args.augment_seed.is_some() {
        let mut a = cfg.clone().with_augmentation(ratio.unwrap_or(1.5)).augment.expect("set above");
        a.k = args.k_augment.or(file_augment.and_then(|f| f.k)).unwrap_or(a.k);
        a.seed = args.augment_seed.or(file_augment.and_then(|f| f.seed)).unwrap_or(a.seed);
        cfg.augment = Some(a);
    }

    let ff = file.forest.as_ref();
    let forest = &mut cfg.forest;
    forest.n_trees = args.n_trees.or(ff.and_then(|f| f.n_trees)).unwrap_or(forest.n_trees);
    forest.max_depth = args.max_depth.or(ff.and_then(|f| f.max_depth)).or(forest.max_depth);
    forest.min_samples_split = args
        .min_samples_split
        .or(ff.and_then(|f| f.min_samples_split))
        .unwrap_or(forest.min_samples_split);
    forest.max_features = match &args.max_features {
        Some(s) => Some(s.parse()?),
        None => ff.and_then(|f| f.max_features),
    };
    forest.bootstrap = !args.no_bootstrap && ff.and_then(|f| f.bootstrap).unwrap_or(true);
    forest.seed = args.forest_seed.or(ff.and_then(|f| f.seed)).unwrap_or(forest.seed);

    cfg.evaluate = match &args.evaluate {
        Some(s) => s.parse()?,
        None => file.evaluate.unwrap_or(if cfg.augment.is_some() && cfg.corrupt.is_none() {
            Evaluate::Augmentation
        } else {
            Evaluate::Imputation
        }),
    };
    cfg.percent_display = args.percent || file.percent_display.unwrap_or(false);
    Ok(cfg)
}

/// Generator settings from defaults, then file, then flags. `random_state`
/// defaults to the master seed.
pub fn generator_config(args: &GeneratorArgs, file: Option<&GeneratorFile>, seed: u64) -> GenConfig {
    let d = GenConfig::default();
    let f = |get: fn(&GeneratorFile) -> Option<usize>| file.and_then(get);
    GenConfig {
        n_samples: args.n_samples.or(f(|g| g.n_samples)).unwrap_or(d.n_samples),
        n_features: args.n_features.or(f(|g| g.n_features)).unwrap_or(d.n_features),
        n_informative: args.n_informative.or(f(|g| g.n_informative)),
        n_classes: args.n_classes.or(f(|g| g.n_classes)).unwrap_or(d.n_classes),
        shuffle: !args.no_shuffle && file.and_then(|g| g.shuffle).unwrap_or(true),
        noise: args.noise.or(file.and_then(|g| g.noise)).unwrap_or(d.noise),
        random_state: args
            .random_state
            .or(file.and_then(|g| g.random_state))
            .unwrap_or(seed),
    }
}
