//! Interquartile-range fences and outlier nulling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqrFences {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower: f64,
    pub upper: f64,
}

impl IqrFences {
    /// True when `v` lies strictly outside `[lower, upper]`.
    pub fn is_outlier(&self, v: f64) -> bool {
        v < self.lower || v > self.upper
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureOutliers {
    pub feature: usize,
    pub name: String,
    #[serde(flatten)]
    pub fences: IqrFences,
    pub nulled: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierSummary {
    pub features: Vec<FeatureOutliers>,
    pub total_nulled: usize,
}

/// Quantile of an ascending slice, linear interpolation at position `p * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn compute_fences(values: &[f64]) -> Result<IqrFences> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(fences_of_sorted(&sorted))
}

pub(crate) fn fences_of_sorted(sorted: &[f64]) -> IqrFences {
    let q1 = quantile_sorted(sorted, 0.25);
    let median = quantile_sorted(sorted, 0.5);
    let q3 = quantile_sorted(sorted, 0.75);
    let iqr = q3 - q1;
    IqrFences {
        q1,
        median,
        q3,
        iqr,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    }
}

/// Fences for every feature, computed over observed cells only.
pub fn feature_fences(ds: &Dataset) -> Result<Vec<IqrFences>> {
    (0..ds.n_features())
        .into_par_iter()
        .map(|f| {
            let view = ds.column_view(f)?;
            compute_fences(&view.present_values).map_err(|_| Error::EmptyFeature {
                feature: f,
                name: ds.feature_names()[f].clone(),
            })
        })
        .collect()
}

/// Masks every observed cell outside the given per-feature fences.
/// Returns the new dataset and the number of cells nulled per feature.
pub fn apply_fences(ds: &Dataset, fences: &[IqrFences]) -> Result<(Dataset, Vec<usize>)> {
    if fences.len() != ds.n_features() {
        return Err(Error::WidthMismatch {
            expected: ds.n_features(),
            got: fences.len(),
        });
    }
    let flagged: Vec<Vec<usize>> = fences
        .par_iter()
        .enumerate()
        .map(|(f, fence)| {
            (0..ds.n_rows())
                .filter(|&r| ds.value(r, f).is_some_and(|v| fence.is_outlier(v)))
                .collect()
        })
        .collect();
    let mut out = ds.clone();
    for (f, rows) in flagged.iter().enumerate() {
        for &r in rows {
            out.set_missing(r, f);
        }
    }
    Ok((out, flagged.iter().map(Vec::len).collect()))
}

/// Single pass: fences from the input's observed cells, then strict-inequality nulling.
pub fn null_outliers(ds: &Dataset) -> Result<(Dataset, OutlierSummary)> {
    let fences = feature_fences(ds)?;
    let (out, counts) = apply_fences(ds, &fences)?;
    let features = fences
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(f, (fences, nulled))| FeatureOutliers {
            feature: f,
            name: ds.feature_names()[f].clone(),
            fences,
            nulled,
        })
        .collect::<Vec<_>>();
    let total_nulled = features.iter().map(|f| f.nulled).sum();
    Ok((
        out,
        OutlierSummary {
            features,
            total_nulled,
        },
    ))
}
