//! Brute-force oracles shared by the integration tests. None of them call into
//! the library routines they check.

#![allow(dead_code)]

use xgewfi::rng::Stream;
use xgewfi::{Dataset, DatasetKind};

/// D evaluated at every pooled point by counting, no sorting or sweeping.
pub fn brute_ks_d(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    a.iter()
        .chain(b)
        .map(|&x| {
            let ca = a.iter().filter(|&&v| v <= x).count();
            let cb = b.iter().filter(|&&v| v <= x).count();
            (ca as f64 / n - cb as f64 / m).abs()
        })
        .fold(0.0, f64::max)
}

/// `2 Σ (-1)^{j-1} exp(-2 j² λ²)` summed term by term until the terms underflow to zero.
pub fn direct_kolmogorov(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1u64.. {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        if term == 0.0 {
            break;
        }
        sum += if j % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// k-th smallest value (0-based) by counting ranks.
fn order_statistic(values: &[f64], k: usize) -> f64 {
    for &candidate in values {
        let below = values.iter().filter(|&&v| v < candidate).count();
        let at_most = values.iter().filter(|&&v| v <= candidate).count();
        if below <= k && k < at_most {
            return candidate;
        }
    }
    unreachable!("k out of range")
}

/// Linear-interpolation quantile at position p·(n−1).
pub fn brute_quantile(values: &[f64], p: f64) -> f64 {
    let h = p * (values.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    let a = order_statistic(values, lo);
    let b = order_statistic(values, hi);
    a + (h - lo as f64) * (b - a)
}

pub fn brute_fences(values: &[f64]) -> (f64, f64) {
    let q1 = brute_quantile(values, 0.25);
    let q3 = brute_quantile(values, 0.75);
    let iqr = q3 - q1;
    (q1 - 1.5 * iqr, q3 + 1.5 * iqr)
}

/// True when `s` equals `a + u·(b − a)` for some u in [0, 1) within `tol` relative error.
pub fn on_segment(s: &[f64], a: &[f64], b: &[f64], tol: f64) -> bool {
    let (axis, span) = a
        .iter()
        .zip(b)
        .map(|(x, y)| y - x)
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .expect("non-empty rows");
    if span == 0.0 {
        return s.iter().zip(a).all(|(x, y)| close(*x, *y, tol));
    }
    let u = (s[axis] - a[axis]) / span;
    if !(-tol..1.0 + tol).contains(&u) {
        return false;
    }
    s.iter()
        .zip(a.iter().zip(b))
        .all(|(&x, (&p, &q))| close(x, p + u * (q - p), tol))
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

/// Standard-normal features with the given target column.
pub fn gaussian_dataset(stream: &mut Stream, n_features: usize, target: Vec<f64>, kind: DatasetKind) -> Dataset {
    let n = target.len();
    let columns = (0..n_features)
        .map(|_| (0..n).map(|_| stream.normal()).collect())
        .collect();
    Dataset::complete(columns, target, kind, Dataset::default_names(n_features)).unwrap()
}

/// Sample of length `n` that draws from a small integer grid half the time, so ties are common.
pub fn tied_sample(stream: &mut Stream, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if stream.coin() {
                stream.below(7) as f64
            } else {
                stream.normal() * 3.0
            }
        })
        .collect()
}
