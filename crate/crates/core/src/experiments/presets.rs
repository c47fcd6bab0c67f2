//! Ready-made configurations for the standard figure setups.
//!
//! Figure 1 (log score, additive noise) and Figure 2 (CRPS, additive noise)
//! use truth `N(1, 2²)`; the "right" panel scores the forecast `N(0, 2²)`,
//! the "left" panel the perfect forecast `N(1, 2²)`.
//!
//! Figure 3 (log score, multiplicative gamma noise) has no published
//! parameters. The defaults here are a reconstruction: truth `Gamma(2, 1)`,
//! forecast `Gamma(2, 1)`, error `InvGamma(a, a − 1)` (so `E[ε] = 1`) with
//! `a ∈ {3, 6, 12}`.

use alloc::vec::Vec;

use crate::distributions::{GammaParams, GaussianParams, InvGammaParams, RngSeed};
use crate::error::Result;
use crate::experiments::config::{ExperimentConfig, ModelSpec, ScoreStream};
use crate::models::{ModelA, ModelB};
use crate::scores::{Forecast, ScoreKind};

pub const FIG3_ERROR_SHAPES: [f64; 3] = [3.0, 6.0, 12.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// Perfect forecast, `μ = μ₀ = 1`, `σ = σ₀ = 2`.
    Left,
    /// `μ = 0`, `σ = 2`.
    Right,
}

fn panel_forecast(panel: Panel) -> Result<GaussianParams> {
    match panel {
        Panel::Left => GaussianParams::new(1.0, 4.0),
        Panel::Right => GaussianParams::new(0.0, 4.0),
    }
}

fn additive_model(omega2: f64) -> Result<ModelA> {
    ModelA::new(GaussianParams::new(1.0, 4.0)?, omega2)
}

/// Log score under additive noise with streams `{s₀(f,Y), s∧, s∨}`.
pub fn fig1(panel: Panel, omega2: f64, n: usize, seed: RngSeed) -> Result<ExperimentConfig> {
    ExperimentConfig::new(
        ModelSpec::AdditiveGaussian(additive_model(omega2)?),
        Forecast::Gaussian(panel_forecast(panel)?),
        ScoreKind::Log,
        &[ScoreStream::NoneOnObs, ScoreStream::Wedge, ScoreStream::Vee],
        n,
        seed,
    )?
    .with_density_grid(0.0, 12.0, 481)
}

/// CRPS under additive noise with streams `{s₀(f,X), s₀(f,Y), s∨}`.
pub fn fig2(panel: Panel, omega2: f64, n: usize, seed: RngSeed) -> Result<ExperimentConfig> {
    ExperimentConfig::new(
        ModelSpec::AdditiveGaussian(additive_model(omega2)?),
        Forecast::Gaussian(panel_forecast(panel)?),
        ScoreKind::Crps,
        &[ScoreStream::NoneOnTruth, ScoreStream::NoneOnObs, ScoreStream::Vee],
        n,
        seed,
    )?
    .with_density_grid(0.0, 8.0, 401)
}

/// Log score under multiplicative gamma noise with error shape `a`.
pub fn fig3(error_shape: f64, n: usize, seed: RngSeed) -> Result<ExperimentConfig> {
    let model = ModelB::new(GammaParams::new(2.0, 1.0)?, InvGammaParams::new(error_shape, error_shape - 1.0)?)?;
    ExperimentConfig::new(
        ModelSpec::MultiplicativeGamma(model),
        Forecast::Gamma(GammaParams::new(2.0, 1.0)?),
        ScoreKind::Log,
        &[ScoreStream::NoneOnTruth, ScoreStream::NoneOnObs, ScoreStream::Vee],
        n,
        seed,
    )?
    .with_density_grid(0.5, 10.0, 381)
}

pub fn fig3_all(n: usize, seed: RngSeed) -> Result<Vec<ExperimentConfig>> {
    FIG3_ERROR_SHAPES.iter().map(|&a| fig3(a, n, seed)).collect()
}
