//! Sample summaries used by the experiment engine.

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::error::{domain, Result};

const PAIRWISE_BLOCK: usize = 128;

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, not on how they were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn pairwise_sum_map(values: &[f64], f: &impl Fn(f64) -> f64) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().map(|&v| f(v)).sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_map(&values[..mid], f) + pairwise_sum_map(&values[mid..], f)
}

/// Sample mean, unbiased variance and fourth central moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub fourth_central: f64,
}

impl Moments {
    /// Two-pass moments. A constant sample has variance exactly zero.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                variance: f64::NAN,
                fourth_central: f64::NAN,
            };
        }
        let shift = values[0];
        let nf = n as f64;
        let mean = shift + pairwise_sum_map(values, &|v| v - shift) / nf;
        let m2 = pairwise_sum_map(values, &|v| (v - mean) * (v - mean)) / nf;
        let m4 = pairwise_sum_map(values, &|v| {
            let d = (v - mean) * (v - mean);
            d * d
        }) / nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        Self {
            n,
            mean,
            variance,
            fourth_central: m4,
        }
    }

    pub fn mean_std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Delta-method standard error of the sample variance, `√((m₄ − s⁴)/n)`.
    pub fn variance_std_error(&self) -> f64 {
        let v = self.fourth_central - self.variance * self.variance;
        (v.max(0.0) / self.n as f64).sqrt()
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("KS statistic needs at least one sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(domain("KS statistic got a NaN sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Empirical quantile by linear interpolation on sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}
