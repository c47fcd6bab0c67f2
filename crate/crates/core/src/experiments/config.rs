//! Experiment descriptions and their validation.

use alloc::vec::Vec;

use crate::distributions::RngSeed;
use crate::error::{config, Result};
use crate::models::{EivModel, ModelA, ModelB};
use crate::numerics::QuadratureSpec;
use crate::scores::{Correction, Forecast, ScoreKind};

/// Noise model an experiment draws `(x, y[, z])` from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    AdditiveGaussian(ModelA),
    MultiplicativeGamma(ModelB),
    Eiv(EivModel),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::AdditiveGaussian(_) => "additive-gaussian",
            ModelSpec::MultiplicativeGamma(_) => "multiplicative-gamma",
            ModelSpec::Eiv(_) => "eiv",
        }
    }
}

/// One score stream of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreStream {
    /// `s₀(f, X)`, the ideal score against the hidden truth.
    NoneOnTruth,
    /// `s₀(f, Y)`, the naive score against the observation.
    NoneOnObs,
    Wedge,
    Vee,
    /// EIV only: vee correction conditioning on `(Y, Z)`.
    VeeJoint,
}

impl ScoreStream {
    pub const ALL: [ScoreStream; 5] = [
        ScoreStream::NoneOnTruth,
        ScoreStream::NoneOnObs,
        ScoreStream::Wedge,
        ScoreStream::Vee,
        ScoreStream::VeeJoint,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreStream::NoneOnTruth => "none_on_truth",
            ScoreStream::NoneOnObs => "none_on_obs",
            ScoreStream::Wedge => "wedge",
            ScoreStream::Vee => "vee",
            ScoreStream::VeeJoint => "vee_joint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    pub fn correction(&self) -> Correction {
        match self {
            ScoreStream::NoneOnTruth | ScoreStream::NoneOnObs => Correction::None,
            ScoreStream::Wedge => Correction::Wedge,
            ScoreStream::Vee => Correction::Vee,
            ScoreStream::VeeJoint => Correction::VeeJoint,
        }
    }
}

/// Uniform evaluation grid `lo, lo + h, …, hi` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl DensityGrid {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(config("density grid needs finite lo < hi"));
        }
        if self.points < 2 {
            return Err(config("density grid needs at least 2 points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub forecast: Forecast,
    pub score_kind: ScoreKind,
    /// Streams to evaluate; kept sorted and free of duplicates by [`ExperimentConfig::validate`].
    pub corrections: Vec<ScoreStream>,
    pub n: usize,
    pub seed: RngSeed,
    pub density_grid: Option<DensityGrid>,
    pub bandwidth: Option<f64>,
    /// Used by the quadrature-based gamma CRPS correction.
    pub quadrature: QuadratureSpec,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, forecast: Forecast, score_kind: ScoreKind, corrections: &[ScoreStream], n: usize, seed: RngSeed) -> Result<Self> {
        let mut c = Self {
            model,
            forecast,
            score_kind,
            corrections: corrections.to_vec(),
            n,
            seed,
            density_grid: None,
            bandwidth: None,
            quadrature: QuadratureSpec::default(),
        };
        c.corrections.sort();
        c.validate()?;
        Ok(c)
    }

    pub fn with_density_grid(mut self, lo: f64, hi: f64, points: usize) -> Result<Self> {
        self.density_grid = Some(DensityGrid { lo, hi, points });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(config("n must be at least 2"));
        }
        if self.corrections.is_empty() {
            return Err(config("at least one correction must be requested"));
        }
        if self.corrections.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config("corrections must be distinct and sorted"));
        }
        if let Some(grid) = &self.density_grid {
            grid.validate()?;
        }
        if let Some(bw) = self.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(config("bandwidth must be positive"));
            }
        }
        self.quadrature.validate().map_err(|e| config(alloc::format!("{e}")))?;

        let has = |s: ScoreStream| self.corrections.contains(&s);
        match (&self.model, &self.forecast) {
            (ModelSpec::AdditiveGaussian(m), Forecast::Gaussian(f)) => {
                m.validate()?;
                f.validate(false)?;
                if has(ScoreStream::Wedge) && self.score_kind != ScoreKind::Log {
                    return Err(config("the wedge correction is only available for the log score"));
                }
            }
            (ModelSpec::MultiplicativeGamma(_), Forecast::Gamma(f)) => {
                f.validate()?;
                if has(ScoreStream::Wedge) {
                    return Err(config("the wedge correction is not available under the multiplicative gamma model"));
                }
            }
            (ModelSpec::Eiv(m), Forecast::MvGaussian(f)) => {
                if f.dim() != m.dim() {
                    return Err(config(alloc::format!(
                        "forecast dimension {} does not match model dimension {}",
                        f.dim(),
                        m.dim()
                    )));
                }
                if self.score_kind != ScoreKind::Log {
                    return Err(config("only the log score is available under the EIV model"));
                }
                if has(ScoreStream::Wedge) {
                    return Err(config("the wedge correction is not available under the EIV model"));
                }
            }
            (model, _) => {
                return Err(config(alloc::format!("forecast family does not match the {} model", model.name())));
            }
        }
        if has(ScoreStream::VeeJoint) && !matches!(self.model, ModelSpec::Eiv(_)) {
            return Err(config("vee_joint is only available under the EIV model"));
        }
        Ok(())
    }
}
