//! Outlier and missingness injection with exact per-column counts.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptConfig {
    pub outlier_rate: f64,
    pub missing_rate: f64,
    /// Distance of an injected outlier from the feature mean, in standard deviations.
    pub outlier_magnitude: f64,
    pub seed: u64,
}

impl Default for CorruptConfig {
    fn default() -> Self {
        CorruptConfig {
            outlier_rate: 0.05,
            missing_rate: 0.30,
            outlier_magnitude: 6.0,
            seed: 1,
        }
    }
}

impl CorruptConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("outlier_rate", self.outlier_rate),
            ("missing_rate", self.missing_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} = {rate} is outside [0, 1]")));
            }
        }
        if self.outlier_rate + self.missing_rate >= 1.0 {
            return Err(Error::Config(format!(
                "outlier_rate + missing_rate = {} must be below 1",
                self.outlier_rate + self.missing_rate
            )));
        }
        if !(self.outlier_magnitude > 0.0 && self.outlier_magnitude.is_finite()) {
            return Err(Error::Config(format!(
                "outlier_magnitude = {} must be positive",
                self.outlier_magnitude
            )));
        }
        Ok(())
    }
}

/// Row indices touched per feature, each list sorted ascending.
pub type CellPositions = Vec<Vec<usize>>;

#[derive(Clone, Debug)]
pub struct Corrupted {
    pub dataset: Dataset,
    pub outliers: CellPositions,
    pub missing: CellPositions,
}

fn cell_count(rate: f64, n_rows: usize) -> usize {
    (rate * n_rows as f64).floor() as usize
}

/// Draws `count` rows among `eligible`, uniformly without replacement.
fn draw(stream: &mut Stream, eligible: &[usize], count: usize, feature: usize) -> Result<Vec<usize>> {
    if count > eligible.len() {
        return Err(Error::InvalidDataset(format!(
            "feature {feature} has {} eligible cells, {count} requested",
            eligible.len()
        )));
    }
    let mut rows: Vec<usize> = stream
        .sample_indices(eligible.len(), count)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    rows.sort_unstable();
    Ok(rows)
}

/// Replaces `floor(outlier_rate * n_rows)` observed cells per feature with
/// `mean ± outlier_magnitude * std` of that feature (population moments, sign uniform).
pub fn inject_outliers(ds: &Dataset, cfg: &CorruptConfig) -> Result<(Dataset, CellPositions)> {
    cfg.validate()?;
    let count = cell_count(cfg.outlier_rate, ds.n_rows());
    let mut out = ds.clone();
    let mut positions = Vec::with_capacity(ds.n_features());
    for f in 0..ds.n_features() {
        let view = ds.column_view(f)?;
        let mut stream = Stream::indexed(cfg.seed, "corrupt/outliers", f as u64);
        let rows = draw(&mut stream, &view.row_indices, count, f)?;
        if !rows.is_empty() {
            let n = view.present_values.len() as f64;
            let mean = view.present_values.iter().sum::<f64>() / n;
            let var = view
                .present_values
                .iter()
                .map(|v| (v - mean).powi(2))
                .sum::<f64>()
                / n;
            let offset = cfg.outlier_magnitude * var.sqrt();
            for &r in &rows {
                let value = if stream.coin() { mean + offset } else { mean - offset };
                out.set_value(r, f, value);
            }
        }
        positions.push(rows);
    }
    Ok((out, positions))
}

/// Masks `floor(missing_rate * n_rows)` observed cells per feature (MCAR),
/// never choosing a position listed in `avoid`.
pub fn inject_missing(
    ds: &Dataset,
    cfg: &CorruptConfig,
    avoid: Option<&CellPositions>,
) -> Result<(Dataset, CellPositions)> {
    cfg.validate()?;
    let count = cell_count(cfg.missing_rate, ds.n_rows());
    let mut out = ds.clone();
    let mut positions = Vec::with_capacity(ds.n_features());
    for f in 0..ds.n_features() {
        let mut eligible = ds.column_view(f)?.row_indices;
        if let Some(avoid) = avoid.and_then(|a| a.get(f)) {
            eligible.retain(|r| avoid.binary_search(r).is_err());
        }
        let mut stream = Stream::indexed(cfg.seed, "corrupt/missing", f as u64);
        let rows = draw(&mut stream, &eligible, count, f)?;
        for &r in &rows {
            out.set_missing(r, f);
        }
        positions.push(rows);
    }
    Ok((out, positions))
}

/// Outliers first, then missingness on the remaining cells.
pub fn corrupt(ds: &Dataset, cfg: &CorruptConfig) -> Result<Corrupted> {
    let (with_outliers, outliers) = inject_outliers(ds, cfg)?;
    let (dataset, missing) = inject_missing(&with_outliers, cfg, Some(&outliers))?;
    Ok(Corrupted {
        dataset,
        outliers,
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{make_regression, GenConfig};

    fn data(n: usize) -> Dataset {
        make_regression(&GenConfig {
            n_samples: n,
            ..GenConfig::default()
        })
        .unwrap()
    }

    fn cfg(outlier_rate: f64, missing_rate: f64) -> CorruptConfig {
        CorruptConfig {
            outlier_rate,
            missing_rate,
            ..CorruptConfig::default()
        }
    }

    #[test]
    fn zero_rates_are_identity() {
        let ds = data(200);
        let (a, pos) = inject_outliers(&ds, &cfg(0.0, 0.0)).unwrap();
        assert_eq!(a, ds);
        assert!(pos.iter().all(Vec::is_empty));
        let (b, _) = inject_missing(&ds, &cfg(0.0, 0.0), None).unwrap();
        assert_eq!(b, ds);
    }

    #[test]
    fn exact_counts_at_paper_rates() {
        let ds = data(25_000);
        let c = corrupt(&ds, &cfg(0.05, 0.3)).unwrap();
        for f in 0..ds.n_features() {
            assert_eq!(c.outliers[f].len(), 1250);
            assert_eq!(c.missing[f].len(), 7500);
            let masked = c.dataset.mask(f).iter().filter(|&&m| m).count();
            assert_eq!(masked, 7500);
        }
    }

    #[test]
    fn missing_disjoint_from_outliers() {
        let ds = data(2000);
        let c = corrupt(&ds, &cfg(0.1, 0.5)).unwrap();
        for f in 0..ds.n_features() {
            for r in &c.missing[f] {
                assert!(c.outliers[f].binary_search(r).is_err());
            }
        }
    }

    #[test]
    fn target_untouched_and_outliers_at_magnitude() {
        let ds = data(1000);
        let c = corrupt(&ds, &cfg(0.05, 0.2)).unwrap();
        assert_eq!(c.dataset.target(), ds.target());
        let col = ds.raw_column(0);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
        for &r in &c.outliers[0] {
            let v = c.dataset.value(r, 0).unwrap();
            assert!(((v - mean).abs() - 6.0 * sd).abs() < 1e-9);
        }
    }

    #[test]
    fn untouched_cells_keep_values() {
        let ds = data(500);
        let c = corrupt(&ds, &cfg(0.05, 0.3)).unwrap();
        for f in 0..ds.n_features() {
            for r in 0..ds.n_rows() {
                let touched = c.outliers[f].binary_search(&r).is_ok()
                    || c.missing[f].binary_search(&r).is_ok();
                if !touched {
                    assert_eq!(c.dataset.value(r, f), ds.value(r, f));
                }
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = data(300);
        let a = corrupt(&ds, &cfg(0.05, 0.3)).unwrap();
        let b = corrupt(&ds, &cfg(0.05, 0.3)).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.missing, b.missing);
    }

    #[test]
    fn invalid_rates_rejected() {
        let ds = data(10);
        assert!(matches!(inject_outliers(&ds, &cfg(-0.1, 0.0)), Err(Error::Config(_))));
        assert!(matches!(inject_missing(&ds, &cfg(0.0, 1.5), None), Err(Error::Config(_))));
        assert!(matches!(corrupt(&ds, &cfg(0.5, 0.5)), Err(Error::Config(_))));
    }
}
