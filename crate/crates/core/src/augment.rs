//! SMOTE-style oversampling by interpolation between nearest neighbours.
//!
//! Classification: when the classes are unbalanced (largest and smallest
//! class differ by more than one row) every smaller class grows to
//! `min(floor(ratio * size), majority size)`. When they are balanced every
//! class grows to `floor(ratio * size)`. Regression uses the whole table as
//! one pool grown to `floor(ratio * n_rows)` and interpolates the target too.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::impute::masked_distance;
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub k: usize,
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            k: 5,
            target_ratio: 1.5,
            seed: 1,
        }
    }
}

impl AugmentConfig {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("augmentation k must be at least 1".into()));
        }
        if !(self.target_ratio >= 1.0 && self.target_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "target_ratio = {} must be at least 1",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupAugmentation {
    /// Class index; `None` for the single regression pool.
    pub class: Option<usize>,
    pub original: usize,
    pub synthetic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub k: usize,
    pub target_ratio: f64,
    pub original_rows: usize,
    pub synthetic_rows: usize,
    pub groups: Vec<GroupAugmentation>,
    /// Half-open row ranges of the synthetic rows in the output table.
    pub generated_ranges: Vec<Range<usize>>,
}

impl AugmentSummary {
    pub fn empty(ds: &Dataset, cfg: &AugmentConfig) -> Self {
        AugmentSummary {
            k: cfg.k,
            target_ratio: cfg.target_ratio,
            original_rows: ds.n_rows(),
            synthetic_rows: 0,
            groups: Vec::new(),
            generated_ranges: Vec::new(),
        }
    }
}

struct Plan {
    class: Option<usize>,
    pool: Vec<usize>,
    synthetic: usize,
}

fn grown(size: usize, ratio: f64) -> usize {
    (ratio * size as f64).floor() as usize
}

fn plan(ds: &Dataset, cfg: &AugmentConfig) -> Result<Vec<Plan>> {
    let required = cfg.k + 1;
    match ds.kind() {
        DatasetKind::Regression => {
            let n = ds.n_rows();
            if n < required {
                return Err(Error::PoolTooSmall { size: n, required });
            }
            Ok(vec![Plan {
                class: None,
                pool: (0..n).collect(),
                synthetic: grown(n, cfg.target_ratio) - n,
            }])
        }
        DatasetKind::Classification => {
            let counts = ds.class_counts();
            let majority = counts.values().copied().max().unwrap_or(0);
            let minority = counts.values().copied().min().unwrap_or(0);
            let balanced = majority - minority <= 1;
            let mut plans = Vec::with_capacity(counts.len());
            for (&class, &size) in &counts {
                if size < required {
                    return Err(Error::ClassTooSmall {
                        class,
                        size,
                        required,
                    });
                }
                let goal = if balanced {
                    grown(size, cfg.target_ratio)
                } else {
                    grown(size, cfg.target_ratio).min(majority).max(size)
                };
                let pool = (0..ds.n_rows())
                    .filter(|&r| ds.target()[r] as usize == class)
                    .collect();
                plans.push(Plan {
                    class: Some(class),
                    pool,
                    synthetic: goal - size,
                });
            }
            Ok(plans)
        }
    }
}

/// The `k` pool members nearest to `base` (excluding it), ties by lower row index.
fn neighbours(rows: &[Vec<f64>], pool: &[usize], base: usize, k: usize) -> Vec<usize> {
    let p = rows[base].len();
    let full = vec![false; p];
    let mut candidates: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&o| o != base)
        .map(|&o| {
            let d = masked_distance(&rows[base], &full, &rows[o], &full, p).expect("equal widths");
            (d, o)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, cmp);
        candidates.truncate(k);
    }
    candidates.sort_by(cmp);
    candidates.into_iter().map(|(_, o)| o).collect()
}

/// Appends synthetic rows after the originals. Each synthetic row `s` draws from
/// its own substream, so output does not depend on scheduling.
pub fn augment(ds: &Dataset, cfg: &AugmentConfig) -> Result<(Dataset, AugmentSummary)> {
    cfg.validate()?;
    if ds.has_missing() {
        return Err(Error::InvalidDataset(
            "augmentation requires a dataset without missing cells".into(),
        ));
    }
    let plans = plan(ds, cfg)?;
    let rows: Vec<Vec<f64>> = (0..ds.n_rows()).map(|r| ds.row(r).0).collect();
    let regression = ds.kind() == DatasetKind::Regression;

    let mut jobs = Vec::new();
    for (g, plan) in plans.iter().enumerate() {
        jobs.extend(std::iter::repeat_n(g, plan.synthetic));
    }
    let synthetic: Vec<(Vec<f64>, f64)> = jobs
        .par_iter()
        .enumerate()
        .map(|(s, &g)| {
            let plan = &plans[g];
            let mut stream = Stream::indexed(cfg.seed, "smote", s as u64);
            let base = plan.pool[stream.below(plan.pool.len())];
            let near = neighbours(&rows, &plan.pool, base, cfg.k);
            let other = near[stream.below(near.len())];
            let u = stream.uniform();
            let values = rows[base]
                .iter()
                .zip(&rows[other])
                .map(|(x, y)| x + u * (y - x))
                .collect();
            let (tb, to) = (ds.target()[base], ds.target()[other]);
            let target = if regression { tb + u * (to - tb) } else { tb };
            (values, target)
        })
        .collect();

    let mut out = ds.clone();
    for (values, target) in &synthetic {
        out.push_row(values, *target);
    }
    let mut generated_ranges = Vec::new();
    let mut start = ds.n_rows();
    let mut groups = Vec::with_capacity(plans.len());
    for plan in &plans {
        if plan.synthetic > 0 {
            generated_ranges.push(start..start + plan.synthetic);
            start += plan.synthetic;
        }
        groups.push(GroupAugmentation {
            class: plan.class,
            original: plan.pool.len(),
            synthetic: plan.synthetic,
        });
    }
    Ok((
        out,
        AugmentSummary {
            k: cfg.k,
            target_ratio: cfg.target_ratio,
            original_rows: ds.n_rows(),
            synthetic_rows: synthetic.len(),
            groups,
            generated_ranges,
        },
    ))
}
