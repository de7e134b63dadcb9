//! Importance-weighted KS errors and the global xGEWFI score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ImportanceVector;
use crate::ks::KsResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: usize,
    pub importance: f64,
    pub ks_error: f64,
    pub weighted_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalScores {
    /// Sum of per-feature KS errors.
    pub ks_global: f64,
    /// Sum of importance-weighted KS errors.
    pub xgewfi: f64,
}

pub fn score(
    importances: &ImportanceVector,
    ks_results: &[KsResult],
) -> Result<(Vec<FeatureScore>, GlobalScores)> {
    if importances.len() != ks_results.len() {
        return Err(Error::LengthMismatch {
            importances: importances.len(),
            ks_results: ks_results.len(),
        });
    }
    let scores: Vec<FeatureScore> = importances
        .weights()
        .iter()
        .zip(ks_results)
        .enumerate()
        .map(|(feature, (&importance, ks))| FeatureScore {
            feature,
            importance,
            ks_error: ks.d_statistic,
            weighted_error: importance * ks.d_statistic,
        })
        .collect();
    let globals = GlobalScores {
        ks_global: scores.iter().map(|s| s.ks_error).sum(),
        xgewfi: scores.iter().map(|s| s.weighted_error).sum(),
    };
    Ok((scores, globals))
}

/// Feature indices by weighted error, largest first; ties keep the lower index first.
pub fn rank_features(scores: &[FeatureScore]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .weighted_error
            .total_cmp(&scores[a].weighted_error)
            .then(scores[a].feature.cmp(&scores[b].feature))
    });
    order.into_iter().map(|i| scores[i].feature).collect()
}
