//! CART random forest with mean-decrease-in-impurity feature importances.
//!
//! Regression trees split on variance, classification trees on Gini impurity.
//! Every candidate threshold (midpoints between consecutive distinct values)
//! is scanned exactly. Equal impurity decreases resolve to the lowest feature
//! index, then the lowest threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    Third,
    All,
}

impl MaxFeatures {
    pub fn default_for(kind: DatasetKind) -> Self {
        match kind {
            DatasetKind::Classification => MaxFeatures::Sqrt,
            DatasetKind::Regression => MaxFeatures::Third,
        }
    }

    /// Candidate features per node. `Sqrt` rounds down, `Third` rounds up.
    pub fn count(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Third => n_features.div_ceil(3),
            MaxFeatures::All => n_features,
        };
        m.clamp(1, n_features.max(1))
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "third" => Ok(MaxFeatures::Third),
            "all" => Ok(MaxFeatures::All),
            other => Err(Error::Config(format!("unknown max_features {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// `None` picks `Sqrt` for classification and `Third` for regression.
    pub max_features: Option<MaxFeatures>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            bootstrap: true,
            seed: 1,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        impurity: f64,
    },
    Leaf {
        prediction: f64,
        n_samples: usize,
        impurity: f64,
    },
}

impl TreeNode {
    pub fn n_samples(&self) -> usize {
        match *self {
            TreeNode::Internal { n_samples, .. } | TreeNode::Leaf { n_samples, .. } => n_samples,
        }
    }

    pub fn impurity(&self) -> f64 {
        match *self {
            TreeNode::Internal { impurity, .. } | TreeNode::Leaf { impurity, .. } => impurity,
        }
    }
}

/// Nodes in an arena; the root is node 0. Rows with `x[feature] <= threshold` go left.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { prediction, .. } => return prediction,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Unnormalized impurity decrease attributed to each feature.
    fn impurity_decrease(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        let total = self.nodes[0].n_samples() as f64;
        for node in &self.nodes {
            if let TreeNode::Internal {
                feature,
                left,
                right,
                n_samples,
                impurity,
                ..
            } = *node
            {
                let (l, r) = (&self.nodes[left], &self.nodes[right]);
                let gain = (n_samples as f64 * impurity
                    - l.n_samples() as f64 * l.impurity()
                    - r.n_samples() as f64 * r.impurity())
                    / total;
                // rounding can leave a zero-gain split slightly negative
                out[feature] += gain.max(0.0);
            }
        }
        out
    }

    /// Per-tree importances normalized to sum 1; `None` when the tree has no gain.
    pub fn importances(&self, n_features: usize) -> Option<Vec<f64>> {
        let raw = self.impurity_decrease(n_features);
        let sum: f64 = raw.iter().sum();
        (sum > 0.0).then(|| raw.iter().map(|v| v / sum).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    kind: DatasetKind,
    n_features: usize,
    n_classes: usize,
}

/// Normalized per-feature weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImportanceVector {
    weights: Vec<f64>,
}

impl ImportanceVector {
    /// Accepts any non-empty vector of finite, non-negative weights as given.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidImportance("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidImportance(format!("weight {w} is not a finite non-negative number")));
        }
        Ok(ImportanceVector { weights })
    }

    /// Scales `raw` so it sums to one.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let v = Self::new(raw)?;
        let sum = v.sum();
        if sum <= 0.0 {
            return Err(Error::InvalidImportance("all weights are zero".into()));
        }
        Ok(ImportanceVector {
            weights: v.weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

enum Labels<'a> {
    Real(&'a [f64]),
    Class { labels: Vec<usize>, n_classes: usize },
}

struct Trainer<'a> {
    columns: Vec<&'a [f64]>,
    labels: Labels<'a>,
    cfg: &'a ForestConfig,
    max_features: usize,
}

struct NodeStats {
    impurity: f64,
    prediction: f64,
    pure: bool,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Trainer<'_> {
    fn stats(&self, samples: &[usize]) -> NodeStats {
        let n = samples.len() as f64;
        match &self.labels {
            Labels::Real(y) => {
                let first = y[samples[0]];
                let pure = samples.iter().all(|&s| y[s] == first);
                let mean = samples.iter().map(|&s| y[s]).sum::<f64>() / n;
                let impurity = if pure {
                    0.0
                } else {
                    samples.iter().map(|&s| (y[s] - mean).powi(2)).sum::<f64>() / n
                };
                NodeStats {
                    impurity,
                    prediction: if pure { first } else { mean },
                    pure,
                }
            }
            Labels::Class { labels, n_classes } => {
                let mut counts = vec![0usize; *n_classes];
                for &s in samples {
                    counts[labels[s]] += 1;
                }
                let mut majority = 0;
                for (c, &count) in counts.iter().enumerate() {
                    if count > counts[majority] {
                        majority = c;
                    }
                }
                let sq: f64 = counts.iter().map(|&c| (c as f64 / n).powi(2)).sum();
                NodeStats {
                    impurity: (1.0 - sq).max(0.0),
                    prediction: majority as f64,
                    pure: counts.iter().filter(|&&c| c > 0).count() == 1,
                }
            }
        }
    }

    /// Best threshold on one feature, scored by a proxy that is monotone in the
    /// impurity decrease: `S_L^2/n_L + S_R^2/n_R` (variance) or
    /// `sum c_L^2/n_L + sum c_R^2/n_R` (Gini).
    fn best_on_feature(&self, sorted: &[(f64, usize)]) -> Option<(f64, f64)> {
        let n = sorted.len();
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |i: usize, score: f64| {
            if sorted[i].0 < sorted[i + 1].0 && best.is_none_or(|(s, _)| score > s) {
                let (a, b) = (sorted[i].0, sorted[i + 1].0);
                let mut t = a / 2.0 + b / 2.0;
                if !(t >= a && t < b) {
                    t = a;
                }
                best = Some((score, t));
            }
        };
        match &self.labels {
            Labels::Real(y) => {
                let total: f64 = sorted.iter().map(|&(_, s)| y[s]).sum();
                let mut left = 0.0;
                for i in 0..n - 1 {
                    left += y[sorted[i].1];
                    let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
                    let right = total - left;
                    consider(i, left * left / nl + right * right / nr);
                }
            }
            Labels::Class { labels, n_classes } => {
                let mut right_counts = vec![0u64; *n_classes];
                for &(_, s) in sorted {
                    right_counts[labels[s]] += 1;
                }
                let mut left_counts = vec![0u64; *n_classes];
                let mut sq_left: u64 = 0;
                let mut sq_right: u64 = right_counts.iter().map(|c| c * c).sum();
                for i in 0..n - 1 {
                    let c = labels[sorted[i].1];
                    sq_left += 2 * left_counts[c] + 1;
                    sq_right -= 2 * right_counts[c] - 1;
                    left_counts[c] += 1;
                    right_counts[c] -= 1;
                    let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
                    consider(i, sq_left as f64 / nl + sq_right as f64 / nr);
                }
            }
        }
        best
    }

    /// Scans features in random order until `max_features` non-constant ones were seen.
    fn best_split(&self, samples: &[usize], stream: &mut Stream) -> Option<Split> {
        let mut order: Vec<usize> = (0..self.columns.len()).collect();
        stream.shuffle(&mut order);
        let mut visited = 0;
        let mut best: Option<Split> = None;
        let mut sorted = Vec::with_capacity(samples.len());
        for f in order {
            if visited == self.max_features {
                break;
            }
            let x = self.columns[f];
            sorted.clear();
            sorted.extend(samples.iter().map(|&s| (x[s], s)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if sorted[0].0 == sorted[sorted.len() - 1].0 {
                continue;
            }
            visited += 1;
            if let Some((score, threshold)) = self.best_on_feature(&sorted) {
                let better = match &best {
                    None => true,
                    Some(b) => score > b.score || (score == b.score && f < b.feature),
                };
                if better {
                    best = Some(Split {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn build(&self, samples: Vec<usize>, stream: &mut Stream) -> Tree {
        struct Task {
            node: usize,
            samples: Vec<usize>,
            depth: usize,
        }
        let placeholder = TreeNode::Leaf {
            prediction: 0.0,
            n_samples: 0,
            impurity: 0.0,
        };
        let mut nodes = vec![placeholder.clone()];
        let mut stack = vec![Task {
            node: 0,
            samples,
            depth: 0,
        }];
        while let Some(task) = stack.pop() {
            let stats = self.stats(&task.samples);
            let n_samples = task.samples.len();
            let leaf = TreeNode::Leaf {
                prediction: stats.prediction,
                n_samples,
                impurity: stats.impurity,
            };
            let stop = stats.pure
                || n_samples < self.cfg.min_samples_split
                || self.cfg.max_depth.is_some_and(|d| task.depth >= d);
            let split = if stop {
                None
            } else {
                self.best_split(&task.samples, stream)
            };
            let Some(split) = split else {
                nodes[task.node] = leaf;
                continue;
            };
            let x = self.columns[split.feature];
            let (left, right): (Vec<usize>, Vec<usize>) =
                task.samples.iter().partition(|&&s| x[s] <= split.threshold);
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(placeholder.clone());
            nodes.push(placeholder.clone());
            nodes[task.node] = TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left: li,
                right: ri,
                n_samples,
                impurity: stats.impurity,
            };
            stack.push(Task {
                node: ri,
                samples: right,
                depth: task.depth + 1,
            });
            stack.push(Task {
                node: li,
                samples: left,
                depth: task.depth + 1,
            });
        }
        Tree { nodes }
    }
}

/// Trains `n_trees` trees, each from its own substream `(seed, tree index)`,
/// so parallel and sequential training give identical forests.
pub fn train(ds: &Dataset, cfg: &ForestConfig) -> Result<Forest> {
    cfg.validate()?;
    if ds.has_missing() {
        return Err(Error::InvalidDataset(
            "forest training requires a dataset without missing cells".into(),
        ));
    }
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let y = ds.target();
    if y.iter().all(|&t| t == y[0]) {
        return Err(Error::ConstantTarget);
    }
    let p = ds.n_features();
    let (labels, n_classes) = match ds.kind() {
        DatasetKind::Regression => (Labels::Real(y), 0),
        DatasetKind::Classification => {
            let labels: Vec<usize> = y.iter().map(|&t| t as usize).collect();
            let n_classes = labels.iter().max().map_or(0, |m| m + 1);
            (Labels::Class { labels, n_classes }, n_classes)
        }
    };
    let trainer = Trainer {
        columns: (0..p).map(|f| ds.raw_column(f)).collect(),
        labels,
        cfg,
        max_features: cfg
            .max_features
            .unwrap_or_else(|| MaxFeatures::default_for(ds.kind()))
            .count(p),
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut stream = Stream::indexed(cfg.seed, "forest/tree", t as u64);
            let samples = if cfg.bootstrap {
                (0..n).map(|_| stream.below(n)).collect()
            } else {
                (0..n).collect()
            };
            trainer.build(samples, &mut stream)
        })
        .collect();
    Ok(Forest {
        trees,
        kind: ds.kind(),
        n_features: p,
        n_classes,
    })
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Averages the per-tree normalized importances and renormalizes.
    /// Trees without any impurity decrease contribute nothing.
    pub fn feature_importances(&self) -> Result<ImportanceVector> {
        let mut acc = vec![0.0; self.n_features];
        let mut contributing = 0usize;
        for tree in &self.trees {
            if let Some(w) = tree.importances(self.n_features) {
                contributing += 1;
                for (a, v) in acc.iter_mut().zip(w) {
                    *a += v;
                }
            }
        }
        if contributing == 0 {
            return Err(Error::NoSplits);
        }
        let mean: Vec<f64> = acc.iter().map(|a| a / self.trees.len() as f64).collect();
        ImportanceVector::normalized(mean)
    }

    /// Mean of tree outputs for regression; majority vote (ties to the lowest
    /// class index) for classification.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::WidthMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        match self.kind {
            DatasetKind::Regression => {
                Ok(self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64)
            }
            DatasetKind::Classification => {
                let mut votes = vec![0usize; self.n_classes.max(1)];
                for t in &self.trees {
                    let c = t.predict(row) as usize;
                    if c >= votes.len() {
                        votes.resize(c + 1, 0);
                    }
                    votes[c] += 1;
                }
                let mut best = 0;
                for (c, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = c;
                    }
                }
                Ok(best as f64)
            }
        }
    }
}

pub fn feature_importances(forest: &Forest) -> Result<ImportanceVector> {
    forest.feature_importances()
}

pub fn predict(forest: &Forest, row: &[f64]) -> Result<f64> {
    forest.predict(row)
}
