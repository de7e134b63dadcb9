//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use xgewfi::augment::{augment, AugmentConfig};
use xgewfi::corrupt::{corrupt, CorruptConfig};
use xgewfi::forest::train;
use xgewfi::impute::{impute, ImputeConfig};
use xgewfi::outlier::{compute_fences, null_outliers};
use xgewfi::pipeline::{mask_timestamp, stage_seed, EvaluationMode};
use xgewfi::rng::Stream;
use xgewfi::synthgen::{generate, GenConfig};
use xgewfi::{
    ks_two_sample, rank_features, score, Dataset, DatasetKind, Evaluate, ForestConfig,
    ImportanceVector, InputSpec, KsResult, PipelineConfig,
};

use common::{brute_fences, brute_ks_d, direct_kolmogorov, gaussian_dataset, on_segment, tied_sample};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn ks_of(d: f64) -> KsResult {
    KsResult {
        d_statistic: d,
        p_value: 1.0,
        n_original: 1,
        n_generated: 1,
    }
}

fn table_arithmetic() -> Check {
    let start = Instant::now();
    let importances = [0.57, 0.2, 0.18, 0.0, 0.04];
    let ks = [0.34, 0.34, 0.34, 0.34, 0.33];
    let published = [19.23, 6.84, 6.16, 0.07, 1.45];
    let weights = ImportanceVector::new(importances.to_vec()).map_err(|e| e.to_string())?;
    let results: Vec<KsResult> = ks.iter().map(|&d| ks_of(d)).collect();
    let (scores, globals) = score(&weights, &results).map_err(|e| e.to_string())?;
    for (f, s) in scores.iter().enumerate() {
        let shown = s.weighted_error * 100.0;
        // independent product
        let expected = importances[f] * ks[f] * 100.0;
        ensure((shown - expected).abs() < 1e-9, || format!("feature {f}: {shown} vs product {expected}"))?;
        ensure((shown - published[f]).abs() <= 0.15, || {
            format!("feature {f}: {shown:.4} vs published {}", published[f])
        })?;
    }
    let total = globals.xgewfi * 100.0;
    ensure((total - 33.76).abs() <= 0.5, || format!("total {total:.4} vs 33.76"))?;
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("total {total:.2} (published 33.76) in {took:.2?}"))
}

fn ks_oracle() -> Check {
    let start = Instant::now();
    let mut stream = Stream::new(2024);
    let mut worst_p: f64 = 0.0;
    for case in 0..1000 {
        let n = 1 + stream.below(200);
        let m = 1 + stream.below(200);
        let a = tied_sample(&mut stream, n);
        let b = tied_sample(&mut stream, m);
        let got = ks_two_sample(&a, &b).map_err(|e| e.to_string())?;
        let d = brute_ks_d(&a, &b);
        ensure(got.d_statistic == d, || format!("case {case}: sweep {} vs brute {d}", got.d_statistic))?;
        let lambda = d * ((n * m) as f64 / (n + m) as f64).sqrt();
        let p = direct_kolmogorov(lambda);
        worst_p = worst_p.max((got.p_value - p).abs());
        ensure((got.p_value - p).abs() <= 1e-10, || {
            format!("case {case}: p {} vs series {p} (lambda {lambda})", got.p_value)
        })?;
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("1000 pairs, max p deviation {worst_p:.1e}, {took:.2?}"))
}

fn iqr_oracle() -> Check {
    let fences = compute_fences(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 100.0]).map_err(|e| e.to_string())?;
    ensure(fences.lower == -3.5 && fences.upper == 14.5, || {
        format!("worked example gives [{}, {}]", fences.lower, fences.upper)
    })?;
    let mut stream = Stream::new(77);
    for case in 0..1000 {
        let n = 1 + stream.below(120);
        let values = tied_sample(&mut stream, n);
        let got = compute_fences(&values).map_err(|e| e.to_string())?;
        let (lower, upper) = brute_fences(&values);
        ensure((got.lower - lower).abs() <= 1e-12 && (got.upper - upper).abs() <= 1e-12, || {
            format!("case {case}: [{}, {}] vs oracle [{lower}, {upper}]", got.lower, got.upper)
        })?;
    }
    Ok("worked example exact, 1000 random vectors match".into())
}

fn corruption_recall() -> Check {
    let start = Instant::now();
    let clean = generate(
        DatasetKind::Regression,
        &GenConfig {
            n_samples: 25_000,
            ..GenConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let cfg = CorruptConfig {
        outlier_rate: 0.05,
        outlier_magnitude: 6.0,
        seed: stage_seed(1, "corrupt"),
        ..CorruptConfig::default()
    };
    let corrupted = corrupt(&clean, &cfg).map_err(|e| e.to_string())?;
    let (nulled, _) = null_outliers(&corrupted.dataset).map_err(|e| e.to_string())?;
    let (n, p) = (clean.n_rows(), clean.n_features());
    let (mut injected, mut caught, mut clean_cells, mut false_pos) = (0usize, 0usize, 0usize, 0usize);
    for f in 0..p {
        let mut is_outlier = vec![false; n];
        for &r in &corrupted.outliers[f] {
            is_outlier[r] = true;
        }
        for (r, &outlier) in is_outlier.iter().enumerate() {
            let newly_nulled = nulled.is_missing(r, f) && !corrupted.dataset.is_missing(r, f);
            if outlier {
                injected += 1;
                caught += usize::from(newly_nulled);
            } else if !corrupted.dataset.is_missing(r, f) {
                clean_cells += 1;
                false_pos += usize::from(newly_nulled);
            }
        }
    }
    let recall = caught as f64 / injected as f64;
    let fp_rate = false_pos as f64 / clean_cells as f64;
    ensure(recall >= 0.99, || format!("recall {recall:.4}"))?;
    ensure(fp_rate <= 0.005, || format!("false positive rate {fp_rate:.5}"))?;
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "recall {:.2}% of {injected}, false positives {:.3}% of {clean_cells}, {took:.2?}",
        recall * 100.0,
        fp_rate * 100.0
    ))
}

fn imputation_contract() -> Check {
    let toy = Dataset::new(
        vec![vec![0.0, 2.0, 1.0], vec![0.0, 2.0, 0.0]],
        vec![vec![false; 3], vec![false, false, true]],
        vec![0.0, 1.0, 2.0],
        DatasetKind::Regression,
        Dataset::default_names(2),
    )
    .map_err(|e| e.to_string())?;
    let (filled, _) = impute(&toy, &ImputeConfig { k: 2, ..ImputeConfig::default() }).map_err(|e| e.to_string())?;
    ensure(filled.value(2, 1) == Some(1.0), || format!("toy cell is {:?}", filled.value(2, 1)))?;

    let clean = generate(
        DatasetKind::Regression,
        &GenConfig {
            n_samples: 4000,
            ..GenConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let corrupted = corrupt(&clean, &CorruptConfig::default()).map_err(|e| e.to_string())?;
    let (holey, _) = null_outliers(&corrupted.dataset).map_err(|e| e.to_string())?;
    let (filled, summary) = impute(&holey, &ImputeConfig::default()).map_err(|e| e.to_string())?;
    ensure(filled.missing_count() == 0, || format!("{} cells still missing", filled.missing_count()))?;
    for f in 0..holey.n_features() {
        let observed: Vec<f64> = (0..holey.n_rows()).filter_map(|r| holey.value(r, f)).collect();
        let lo = observed.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for r in 0..holey.n_rows() {
            if holey.is_missing(r, f) {
                let v = filled.value(r, f).expect("filled");
                ensure((lo..=hi).contains(&v), || format!("row {r} feature {f}: {v} outside [{lo}, {hi}]"))?;
            } else {
                ensure(filled.value(r, f) == holey.value(r, f), || format!("observed cell ({r}, {f}) changed"))?;
            }
        }
    }
    Ok(format!("toy cell 1.0, {} cells filled inside observed ranges", summary.total_imputed))
}

fn class_dataset(stream: &mut Stream, sizes: &[usize]) -> Dataset {
    let target: Vec<f64> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c as f64, s))
        .collect();
    gaussian_dataset(stream, 3, target, DatasetKind::Classification)
}

/// Synthetic rows per class under the growth rule, computed independently.
fn expected_growth(sizes: &[usize], ratio: f64) -> Vec<usize> {
    let max = *sizes.iter().max().unwrap();
    let min = *sizes.iter().min().unwrap();
    sizes
        .iter()
        .map(|&s| {
            let grown = (ratio * s as f64).floor() as usize;
            if max - min <= 1 {
                grown - s
            } else {
                grown.min(max).max(s) - s
            }
        })
        .collect()
}

fn row_with_target(ds: &Dataset, r: usize, with_target: bool) -> Vec<f64> {
    let (mut row, _) = ds.row(r);
    if with_target {
        row.push(ds.target()[r]);
    }
    row
}

/// Checks geometry and bounds of every synthetic row against its pool.
fn check_synthetic(before: &Dataset, after: &Dataset, ranges: &[std::ops::Range<usize>]) -> Result<usize, String> {
    let regression = before.kind() == DatasetKind::Regression;
    for r in 0..before.n_rows() {
        ensure(
            row_with_target(after, r, true) == row_with_target(before, r, true),
            || format!("original row {r} changed"),
        )?;
    }
    let mut checked = 0;
    for r in ranges.iter().flat_map(|range| range.clone()) {
        let s = row_with_target(after, r, regression);
        let pool: Vec<usize> = (0..before.n_rows())
            .filter(|&o| regression || before.target()[o] == after.target()[r])
            .collect();
        let rows: Vec<Vec<f64>> = pool.iter().map(|&o| row_with_target(before, o, regression)).collect();
        for f in 0..s.len() {
            let lo = rows.iter().map(|x| x[f]).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|x| x[f]).fold(f64::NEG_INFINITY, f64::max);
            ensure(s[f] >= lo && s[f] <= hi, || format!("row {r} coordinate {f} = {} outside [{lo}, {hi}]", s[f]))?;
        }
        let found = rows
            .iter()
            .any(|a| rows.iter().any(|b| a != b && on_segment(&s, a, b, 1e-9)));
        ensure(found, || format!("synthetic row {r} lies on no pool segment"))?;
        checked += 1;
    }
    Ok(checked)
}

fn smote_geometry() -> Check {
    let mut stream = Stream::new(5);
    let mut checked = 0;
    for (sizes, ratio) in [
        (vec![100, 40, 25], 2.0),
        (vec![500, 100], 3.0),
        (vec![60, 60], 1.5),
        (vec![60, 61], 1.0),
    ] {
        let ds = class_dataset(&mut stream, &sizes);
        let cfg = AugmentConfig {
            target_ratio: ratio,
            seed: 9,
            ..AugmentConfig::default()
        };
        let (out, summary) = augment(&ds, &cfg).map_err(|e| e.to_string())?;
        let expected = expected_growth(&sizes, ratio);
        let got: Vec<usize> = summary.groups.iter().map(|g| g.synthetic).collect();
        ensure(got == expected, || format!("sizes {sizes:?} ratio {ratio}: {got:?} vs {expected:?}"))?;
        ensure(out.n_rows() == ds.n_rows() + expected.iter().sum::<usize>(), || "row count".into())?;
        let counts = out.class_counts();
        for (c, (&s, &e)) in sizes.iter().zip(&expected).enumerate() {
            ensure(counts.get(&c) == Some(&(s + e)), || format!("class {c} has {:?} rows", counts.get(&c)))?;
        }
        checked += check_synthetic(&ds, &out, &summary.generated_ranges)?;
    }
    ensure(
        expected_growth(&[500, 100], 3.0) == vec![0, 200],
        || "minority 100 at ratio 3 under majority 500 must gain 200".into(),
    )?;

    let target: Vec<f64> = (0..150).map(|_| stream.normal() * 10.0).collect();
    let ds = gaussian_dataset(&mut stream, 4, target, DatasetKind::Regression);
    let (out, summary) = augment(&ds, &AugmentConfig::default()).map_err(|e| e.to_string())?;
    ensure(out.n_rows() == 225, || format!("regression grew to {} rows, expected 225", out.n_rows()))?;
    checked += check_synthetic(&ds, &out, &summary.generated_ranges)?;
    Ok(format!("{checked} synthetic rows on pool segments, counts exact"))
}

fn forest_sanity() -> Check {
    let start = Instant::now();
    let mut stream = Stream::new(3);
    let x0: Vec<f64> = (0..2000).map(|_| stream.normal()).collect();
    let mut columns = vec![x0.clone()];
    columns.extend((0..4).map(|_| (0..2000).map(|_| stream.normal()).collect::<Vec<f64>>()));
    let ds = Dataset::complete(columns, x0, DatasetKind::Regression, Dataset::default_names(5))
        .map_err(|e| e.to_string())?;
    let forest = train(&ds, &ForestConfig::default()).map_err(|e| e.to_string())?;
    let imp = forest.feature_importances().map_err(|e| e.to_string())?;
    let w = imp.weights();
    ensure(w[0] > 0.9, || format!("importance of feature 0 is {:.4}", w[0]))?;
    ensure((imp.sum() - 1.0).abs() <= 1e-9, || format!("weights sum to {}", imp.sum()))?;
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("importance of x0 {:.4}, {took:.2?}", w[0]))
}

fn case_config(kind: DatasetKind, dir: &Path) -> PipelineConfig {
    let input = InputSpec::Generate {
        kind,
        generator: GenConfig {
            n_samples: 25_000,
            ..GenConfig::default()
        },
    };
    PipelineConfig::new(1, input, dir).with_corruption()
}

fn importance_ranking(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order
}

fn case_shapes() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    let regression = xgewfi::run(&case_config(DatasetKind::Regression, &dir.path().join("case1")))
        .map_err(|e| e.to_string())?;
    let eval = &regression.evaluations[0];
    let ks: Vec<f64> = eval.scores.iter().map(|s| s.ks_error).collect();
    let w = regression.importances.weights();
    let ks_spread = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ks.iter().copied().fold(f64::INFINITY, f64::min);
    let imp_ratio = w.iter().copied().fold(f64::NEG_INFINITY, f64::max) / w.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(ks_spread < 0.1, || format!("case 1 KS spread {ks_spread:.4}"))?;
    ensure(imp_ratio > 5.0, || format!("case 1 importance max/min {imp_ratio:.3}"))?;
    let weighted_rank = rank_features(&eval.scores);
    let imp_rank = importance_ranking(w);
    ensure(weighted_rank == imp_rank, || {
        format!("case 1 weighted ranking {weighted_rank:?} vs importance ranking {imp_rank:?}")
    })?;

    let mut cfg = case_config(DatasetKind::Classification, &dir.path().join("case2")).with_augmentation(1.5);
    cfg.evaluate = Evaluate::Augmentation;
    let classification = xgewfi::run(&cfg).map_err(|e| e.to_string())?;
    let eval = &classification.evaluations[0];
    ensure(eval.mode == EvaluationMode::Augmentation, || "case 2 evaluated the wrong mode".into())?;
    let s = &eval.scores;
    let inverted = (0..s.len()).flat_map(|i| (0..s.len()).map(move |j| (i, j))).find(|&(i, j)| {
        s[i].ks_error < s[j].ks_error && s[i].weighted_error > s[j].weighted_error
    });
    let (i, j) = inverted.ok_or_else(|| "case 2 has no pair whose weighted order inverts the KS order".to_string())?;
    let took = within(Duration::from_secs(300), start)?;
    Ok(format!(
        "case 1 KS spread {ks_spread:.3}, importance ratio {imp_ratio:.2}, rankings equal; case 2 features {i},{j} invert; {took:.2?}"
    ))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = |name: &str| {
        let input = InputSpec::Generate {
            kind: DatasetKind::Classification,
            generator: GenConfig {
                n_samples: 3000,
                ..GenConfig::default()
            },
        };
        let mut cfg = PipelineConfig::new(42, input, dir.path().join(name))
            .with_corruption()
            .with_augmentation(1.5);
        cfg.evaluate = Evaluate::Both;
        cfg
    };
    let first = xgewfi::run(&config("a")).map_err(|e| e.to_string())?;
    let second = xgewfi::run(&config("b")).map_err(|e| e.to_string())?;
    let read = |p: &Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    let json = |p: &Path| -> Result<String, String> { Ok(mask_timestamp(&String::from_utf8(read(p)?).map_err(|e| e.to_string())?)) };
    ensure(json(&first.bundle.json_path)? == json(&second.bundle.json_path)?, || "report.json differs".into())?;
    ensure(first.bundle.svg_paths.len() == second.bundle.svg_paths.len(), || "SVG count differs".into())?;
    for (a, b) in first.bundle.svg_paths.iter().zip(&second.bundle.svg_paths) {
        ensure(read(a)? == read(b)?, || format!("{} differs", a.display()))?;
    }
    Ok(format!("report.json and {} SVG files identical", first.bundle.svg_paths.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table arithmetic", table_arithmetic),
        ("KS oracle equivalence", ks_oracle),
        ("IQR oracle", iqr_oracle),
        ("corruption recall", corruption_recall),
        ("imputation contract", imputation_contract),
        ("SMOTE geometry", smote_geometry),
        ("forest sanity", forest_sanity),
        ("case-shape reproduction", case_shapes),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
