//! Two-sample Kolmogorov–Smirnov statistic with an asymptotic p-value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    #[serde(rename = "d")]
    pub d_statistic: f64,
    #[serde(rename = "p")]
    pub p_value: f64,
    #[serde(rename = "n_o")]
    pub n_original: usize,
    #[serde(rename = "n_g")]
    pub n_generated: usize,
}

const SERIES_TOLERANCE: f64 = 1e-12;

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²)`.
///
/// The alternating series is summed until a term drops below 1e-12. Below
/// λ = 0.05 the series needs thousands of terms, so the equivalent theta-function
/// form `1 - sqrt(2π)/λ Σ exp(-(2j-1)² π² / (8λ²))` is used instead; at that range
/// it equals 1 to double precision.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.05 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut sum = 0.0;
        for j in 1.. {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp();
            sum += term;
            if term < SERIES_TOLERANCE {
                break;
            }
        }
        return (1.0 - (std::f64::consts::TAU).sqrt() / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1.. {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < SERIES_TOLERANCE {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// D = sup |ECDF_o(x) - ECDF_g(x)|, evaluated at every pooled sample point
/// after consuming all values equal to that point from both samples.
pub fn ks_two_sample(original: &[f64], generated: &[f64]) -> Result<KsResult> {
    if original.is_empty() || generated.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = sorted(original);
    let b = sorted(generated);
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (n as f64, m as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / nf - j as f64 / mf).abs());
    }
    // past this point one ECDF is 1 and the other only climbs towards it
    let lambda = d * (nf * mf / (nf + mf)).sqrt();
    Ok(KsResult {
        d_statistic: d,
        p_value: kolmogorov_survival(lambda),
        n_original: n,
        n_generated: m,
    })
}
