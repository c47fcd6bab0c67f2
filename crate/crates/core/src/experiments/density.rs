//! Density curves of score streams: exact laws where available, Gaussian
//! kernel estimates from simulated scores otherwise.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::distributions::{AffineNcChiSq, GaussianParams};
use crate::error::{config, Result};
use crate::experiments::config::{DensityGrid, ExperimentConfig, ModelSpec, ScoreStream};
use crate::experiments::engine::{expected_base_score, ScoreSamples};
use crate::experiments::stats::{quantile_sorted, Moments};
use crate::models::ModelA;
use crate::numerics::phi;
use crate::score_laws::{build_score_laws, law_base_on_truth};
use crate::scores::{Forecast, ScoreKind};

/// Kernel contributions beyond this many bandwidths are dropped.
const KERNEL_CUTOFF: f64 = 8.0;
/// Fraction of probability mass allowed outside the grid before a warning is emitted.
const COVERAGE_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Analytic,
    KernelEstimate,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Analytic => "analytic",
            CurveKind::KernelEstimate => "kernel_estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub label: String,
    pub kind: CurveKind,
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    /// Kernel bandwidth, for kernel estimates.
    pub bandwidth: Option<f64>,
}

impl DensityCurve {
    /// Trapezoid integral of the ordinates over the abscissae.
    pub fn trapezoid(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.ordinates.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub curves: Vec<DensityCurve>,
    /// Common mean `E[s₀(f, X)]` of the ideal score and its corrections.
    pub mean_marker: f64,
    pub warnings: Vec<String>,
}

pub fn curve_label(stream: ScoreStream) -> &'static str {
    match stream {
        ScoreStream::NoneOnTruth => "base-on-truth",
        ScoreStream::NoneOnObs => "base-on-marginal",
        ScoreStream::Wedge => "wedge",
        ScoreStream::Vee => "vee",
        ScoreStream::VeeJoint => "vee-joint",
    }
}

/// Whether [`density_curves_from`] needs simulated scores for this config.
pub fn needs_samples(config: &ExperimentConfig) -> bool {
    analytic_setup(config).is_none()
}

fn analytic_setup(config: &ExperimentConfig) -> Option<(GaussianParams, ModelA)> {
    match (&config.model, &config.forecast, config.score_kind) {
        (ModelSpec::AdditiveGaussian(m), Forecast::Gaussian(f), ScoreKind::Log) => Some((*f, *m)),
        _ => None,
    }
}

/// Ordinates equal to the law's mass on each node's cell divided by the cell
/// width (cells are the half-way partition of the grid, clipped to it).
///
/// Unlike point evaluations these stay finite next to the `1/√t` singularity
/// at the law's offset, and their trapezoid integral equals the law's mass on
/// the grid exactly.
pub fn cell_averaged_density(law: &AffineNcChiSq, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { xs[0] } else { 0.5 * (xs[i - 1] + xs[i]) };
            let hi = if i + 1 == n { xs[n - 1] } else { 0.5 * (xs[i] + xs[i + 1]) };
            law.mass(lo, hi) / (hi - lo)
        })
        .collect()
}

/// Rule-of-thumb bandwidth `0.9·min(sd, IQR/1.34)·n^(−1/5)`.
///
/// Falls back to `sd` when the IQR vanishes; returns zero for a constant sample.
pub fn default_bandwidth(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    bandwidth_sorted(&sorted)
}

fn bandwidth_sorted(sorted: &[f64]) -> f64 {
    if sorted.len() < 2 {
        return 0.0;
    }
    let sd = Moments::from_samples(sorted).variance.sqrt();
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (sorted.len() as f64).powf(-0.2)
}

/// Gaussian kernel density estimate at `xs`.
pub fn kernel_density(samples: &[f64], xs: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(config("kernel density estimate needs samples"));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(config("kernel bandwidth must be positive"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(kde_sorted(&sorted, xs, bandwidth))
}

fn kde_sorted(sorted: &[f64], xs: &[f64], h: f64) -> Vec<f64> {
    let norm = 1.0 / (sorted.len() as f64 * h);
    xs.iter()
        .map(|&x| {
            let start = sorted.partition_point(|&v| v < x - KERNEL_CUTOFF * h);
            let end = sorted.partition_point(|&v| v <= x + KERNEL_CUTOFF * h);
            sorted[start..end].iter().map(|&v| phi((x - v) / h)).sum::<f64>() * norm
        })
        .collect()
}

fn require_grid(config: &ExperimentConfig) -> Result<DensityGrid> {
    config.density_grid.ok_or_else(|| crate::error::config("density curves need a density grid"))
}

/// Density curves for every requested stream, using `samples` for kernel
/// estimates. `samples` may be `None` when [`needs_samples`] is false.
pub fn density_curves_from(config: &ExperimentConfig, samples: Option<&ScoreSamples>) -> Result<DensityReport> {
    config.validate()?;
    let grid = require_grid(config)?;
    let xs = grid.abscissae();
    let mean_marker = expected_base_score(config)?;
    let mut curves = Vec::new();
    let mut warnings = Vec::new();

    if let Some((f, m)) = analytic_setup(config) {
        let laws = build_score_laws(&f, &m)?;
        for &stream in &config.corrections {
            let law = match stream {
                ScoreStream::NoneOnTruth => law_base_on_truth(&f, &m)?,
                ScoreStream::NoneOnObs => laws.law_base_on_marginal,
                ScoreStream::Wedge => laws.law_wedge,
                ScoreStream::Vee => laws.law_vee,
                ScoreStream::VeeJoint => unreachable!("rejected by validation"),
            };
            let label = curve_label(stream);
            let outside = 1.0 - law.mass(grid.lo, grid.hi);
            if outside > COVERAGE_SLACK {
                warnings.push(alloc::format!(
                    "grid [{}, {}] misses {:.2}% of the {label} law",
                    grid.lo,
                    grid.hi,
                    100.0 * outside
                ));
            }
            curves.push(DensityCurve {
                label: label.into(),
                kind: CurveKind::Analytic,
                ordinates: cell_averaged_density(&law, &xs),
                abscissae: xs.clone(),
                bandwidth: None,
            });
        }
    } else {
        let samples = samples.ok_or_else(|| crate::error::config("kernel estimates need simulated scores"))?;
        for &stream in &config.corrections {
            let label = curve_label(stream);
            let values = samples
                .get(stream)
                .ok_or_else(|| crate::error::config(alloc::format!("no samples for stream {}", stream.as_str())))?;
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let outside = sorted.iter().filter(|&&v| v < grid.lo || v > grid.hi).count() as f64 / sorted.len() as f64;
            if outside > COVERAGE_SLACK {
                warnings.push(alloc::format!(
                    "grid [{}, {}] misses {:.2}% of the {label} samples",
                    grid.lo,
                    grid.hi,
                    100.0 * outside
                ));
            }
            let mut h = config.bandwidth.unwrap_or_else(|| bandwidth_sorted(&sorted));
            if h <= 0.0 {
                h = grid.step();
                warnings.push(alloc::format!("{label} scores are constant; bandwidth set to the grid step"));
            }
            curves.push(DensityCurve {
                label: label.into(),
                kind: CurveKind::KernelEstimate,
                ordinates: kde_sorted(&sorted, &xs, h),
                abscissae: xs.clone(),
                bandwidth: Some(h),
            });
        }
    }
    Ok(DensityReport {
        curves,
        mean_marker,
        warnings,
    })
}

/// Serial convenience wrapper around [`density_curves_from`].
pub fn density_curves(config: &ExperimentConfig) -> Result<DensityReport> {
    require_grid(config)?;
    if needs_samples(config) {
        let samples = crate::experiments::engine::simulate_scores(config)?;
        density_curves_from(config, Some(&samples))
    } else {
        density_curves_from(config, None)
    }
}
