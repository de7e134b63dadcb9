//! K-nearest-neighbour imputation under a missing-aware Euclidean distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Mean of the feature's observed cells.
    #[default]
    ColumnMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputeConfig {
    pub k: usize,
    pub fallback: Fallback,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        ImputeConfig {
            k: 5,
            fallback: Fallback::ColumnMean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImputation {
    pub feature: usize,
    pub name: String,
    pub imputed: usize,
    pub fallback: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImputeSummary {
    pub k: usize,
    pub features: Vec<FeatureImputation>,
    pub total_imputed: usize,
    pub total_fallback: usize,
}

/// Euclidean distance over the coordinates observed in both rows, rescaled by
/// `n_features / |shared|`. Masks are `true` where a value is missing.
/// Returns `+inf` when the rows share no observed coordinate.
pub fn masked_distance(
    a: &[f64],
    a_missing: &[bool],
    b: &[f64],
    b_missing: &[bool],
    n_features: usize,
) -> Result<f64> {
    let width = a.len();
    for got in [a_missing.len(), b.len(), b_missing.len()] {
        if got != width {
            return Err(Error::WidthMismatch {
                expected: width,
                got,
            });
        }
    }
    Ok(masked_distance_unchecked(a, a_missing, b, b_missing, n_features))
}

#[inline]
fn masked_distance_unchecked(
    a: &[f64],
    a_missing: &[bool],
    b: &[f64],
    b_missing: &[bool],
    n_features: usize,
) -> f64 {
    let mut sum = 0.0;
    let mut shared = 0usize;
    for i in 0..a.len() {
        if !a_missing[i] && !b_missing[i] {
            let d = a[i] - b[i];
            sum += d * d;
            shared += 1;
        }
    }
    if shared == 0 {
        f64::INFINITY
    } else {
        (n_features as f64 / shared as f64 * sum).sqrt()
    }
}

struct Fill {
    row: usize,
    feature: usize,
    value: f64,
    fallback: bool,
}

/// Fills every missing feature cell with the mean of that feature over the `k`
/// nearest rows observing it. Only values observed in the input are read;
/// ties in distance go to the lower row index.
pub fn impute(ds: &Dataset, cfg: &ImputeConfig) -> Result<(Dataset, ImputeSummary)> {
    if cfg.k == 0 {
        return Err(Error::Config("imputation k must be at least 1".into()));
    }
    let (n, p) = (ds.n_rows(), ds.n_features());
    let mut column_means = Vec::with_capacity(p);
    for f in 0..p {
        let view = ds.column_view(f)?;
        if view.present_values.is_empty() {
            return Err(Error::EmptyFeature {
                feature: f,
                name: ds.feature_names()[f].clone(),
            });
        }
        column_means.push(view.present_values.iter().sum::<f64>() / view.present_values.len() as f64);
    }

    let (values, mask) = ds.row_major();
    let incomplete: Vec<usize> = (0..n)
        .filter(|&r| mask[r * p..(r + 1) * p].iter().any(|&m| m))
        .collect();

    let fills: Vec<Fill> = incomplete
        .par_iter()
        .flat_map_iter(|&r| {
            let row = &values[r * p..(r + 1) * p];
            let row_mask = &mask[r * p..(r + 1) * p];
            let distances: Vec<f64> = (0..n)
                .map(|o| {
                    if o == r {
                        f64::INFINITY
                    } else {
                        masked_distance_unchecked(
                            row,
                            row_mask,
                            &values[o * p..(o + 1) * p],
                            &mask[o * p..(o + 1) * p],
                            p,
                        )
                    }
                })
                .collect();
            let mut fills = Vec::new();
            for f in (0..p).filter(|&f| row_mask[f]) {
                let mut candidates: Vec<(f64, usize)> = (0..n)
                    .filter(|&o| !mask[o * p + f] && distances[o].is_finite())
                    .map(|o| (distances[o], o))
                    .collect();
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if candidates.len() > cfg.k {
                    candidates.select_nth_unstable_by(cfg.k - 1, cmp);
                    candidates.truncate(cfg.k);
                }
                candidates.sort_by(cmp);
                let fill = if candidates.is_empty() {
                    Fill {
                        row: r,
                        feature: f,
                        value: column_means[f],
                        fallback: true,
                    }
                } else {
                    let sum: f64 = candidates.iter().map(|&(_, o)| values[o * p + f]).sum();
                    Fill {
                        row: r,
                        feature: f,
                        value: sum / candidates.len() as f64,
                        fallback: false,
                    }
                };
                fills.push(fill);
            }
            fills
        })
        .collect();

    let mut out = ds.clone();
    let mut features: Vec<FeatureImputation> = (0..p)
        .map(|f| FeatureImputation {
            feature: f,
            name: ds.feature_names()[f].clone(),
            imputed: 0,
            fallback: 0,
        })
        .collect();
    for fill in &fills {
        out.set_value(fill.row, fill.feature, fill.value);
        features[fill.feature].imputed += 1;
        if fill.fallback {
            features[fill.feature].fallback += 1;
        }
    }
    let total_imputed = features.iter().map(|f| f.imputed).sum();
    let total_fallback = features.iter().map(|f| f.fallback).sum();
    Ok((
        out,
        ImputeSummary {
            k: cfg.k,
            features,
            total_imputed,
            total_fallback,
        },
    ))
}
