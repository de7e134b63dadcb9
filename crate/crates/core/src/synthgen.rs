//! Reproducible synthetic regression and classification datasets.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_samples: usize,
    pub n_features: usize,
    /// `None` means `max(1, n_features - 2)`.
    pub n_informative: Option<usize>,
    pub n_classes: usize,
    pub shuffle: bool,
    /// Standard deviation of the Gaussian noise added to regression targets.
    pub noise: f64,
    pub random_state: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_samples: 100,
            n_features: 5,
            n_informative: None,
            n_classes: 2,
            shuffle: true,
            noise: 0.0,
            random_state: 1,
        }
    }
}

impl GenConfig {
    pub fn informative(&self) -> usize {
        self.n_informative
            .unwrap_or_else(|| self.n_features.saturating_sub(2).max(1))
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_features == 0 {
            return Err(Error::Config(
                "n_samples and n_features must be positive".into(),
            ));
        }
        let inf = self.informative();
        if inf == 0 || inf > self.n_features {
            return Err(Error::Config(format!(
                "n_informative = {inf} must lie in 1..={}",
                self.n_features
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("noise = {} must be >= 0", self.noise)));
        }
        Ok(())
    }
}

fn normal_columns(cfg: &GenConfig, stream: &mut Stream) -> Vec<Vec<f64>> {
    let mut columns = vec![vec![0.0; cfg.n_samples]; cfg.n_features];
    for r in 0..cfg.n_samples {
        for col in columns.iter_mut() {
            col[r] = stream.normal();
        }
    }
    columns
}

fn finish(mut ds: Dataset, cfg: &GenConfig) -> Dataset {
    if cfg.shuffle {
        let mut order: Vec<usize> = (0..cfg.n_samples).collect();
        Stream::derived(cfg.random_state, "synthgen/shuffle").shuffle(&mut order);
        ds.permute_rows(&order);
    }
    ds
}

/// Standard-normal features; target is a sparse linear combination whose first
/// `n_informative` coefficients are drawn uniformly from `[1, 100]`.
pub fn make_regression(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let seed = cfg.random_state;
    let columns = normal_columns(cfg, &mut Stream::derived(seed, "synthgen/features"));
    let mut coef_stream = Stream::derived(seed, "synthgen/coefficients");
    let coefs: Vec<f64> = (0..cfg.n_features)
        .map(|f| {
            if f < cfg.informative() {
                1.0 + 99.0 * coef_stream.uniform()
            } else {
                0.0
            }
        })
        .collect();
    let mut noise = Stream::derived(seed, "synthgen/noise");
    let target = (0..cfg.n_samples)
        .map(|r| {
            let signal: f64 = coefs.iter().zip(&columns).map(|(w, c)| w * c[r]).sum();
            signal + cfg.noise * noise.normal()
        })
        .collect();
    let ds = Dataset::complete(
        columns,
        target,
        DatasetKind::Regression,
        Dataset::default_names(cfg.n_features),
    )?;
    Ok(finish(ds, cfg))
}

/// One Gaussian cluster per class centred on a distinct vertex of the
/// `[-1, 1]^n_informative` hypercube; remaining features are pure noise.
/// Class `c` receives rows `r` with `r % n_classes == c`, so counts differ by at most one.
pub fn make_classification(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    if cfg.n_classes < 2 {
        return Err(Error::Config(format!(
            "n_classes = {} must be at least 2",
            cfg.n_classes
        )));
    }
    let inf = cfg.informative();
    if inf < 64 && (cfg.n_classes as u64) > (1u64 << inf) {
        return Err(Error::Config(format!(
            "{} classes do not fit on the vertices of a {inf}-dimensional hypercube",
            cfg.n_classes
        )));
    }
    let seed = cfg.random_state;

    let mut vertex_stream = Stream::derived(seed, "synthgen/vertices");
    let mut vertices: Vec<u64> = Vec::with_capacity(cfg.n_classes);
    while vertices.len() < cfg.n_classes {
        let bits = if inf >= 64 {
            vertex_stream.next_u64()
        } else {
            vertex_stream.next_u64() & ((1u64 << inf) - 1)
        };
        if !vertices.contains(&bits) {
            vertices.push(bits);
        }
    }

    let mut columns = normal_columns(cfg, &mut Stream::derived(seed, "synthgen/features"));
    let mut target = Vec::with_capacity(cfg.n_samples);
    for r in 0..cfg.n_samples {
        let class = r % cfg.n_classes;
        let vertex = vertices[class];
        for (f, col) in columns.iter_mut().enumerate().take(inf) {
            let bit = if f < 64 { (vertex >> f) & 1 } else { 0 };
            col[r] += if bit == 1 { 1.0 } else { -1.0 };
        }
        target.push(class as f64);
    }
    let ds = Dataset::complete(
        columns,
        target,
        DatasetKind::Classification,
        Dataset::default_names(cfg.n_features),
    )?;
    Ok(finish(ds, cfg))
}

pub fn generate(kind: DatasetKind, cfg: &GenConfig) -> Result<Dataset> {
    match kind {
        DatasetKind::Regression => make_regression(cfg),
        DatasetKind::Classification => make_classification(cfg),
    }
}
