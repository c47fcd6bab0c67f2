//! JSON experiment configuration files.
//!
//! ```json
//! {
//!   "model": { "type": "additive-gaussian", "truth_mean": 1.0, "truth_var": 4.0, "omega2": 1.0 },
//!   "forecast": { "type": "gaussian", "mean": 0.0, "sd": 2.0 },
//!   "score": "log",
//!   "corrections": ["none_on_obs", "wedge", "vee"],
//!   "n": 1000000,
//!   "seed": 20240601,
//!   "density_grid": { "lo": 0.0, "hi": 12.0, "points": 481 }
//! }
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scorelab_core::distributions::{GammaParams, GaussianParams, InvGammaParams, MvGaussianParams, RngSeed};
use scorelab_core::experiments::{DensityGrid, ExperimentConfig, ModelSpec, ScoreStream};
use scorelab_core::models::{EivModel, ModelA, ModelB};
use scorelab_core::numerics::QuadratureSpec;
use scorelab_core::scores::{Forecast, ScoreKind};

use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelFile {
    AdditiveGaussian {
        truth_mean: f64,
        truth_var: f64,
        omega2: f64,
    },
    MultiplicativeGamma {
        truth_shape: f64,
        truth_rate: f64,
        err_shape: f64,
        err_scale: f64,
    },
    Eiv {
        truth_mean: Vec<f64>,
        truth_cov: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        obs_bias: Option<Vec<f64>>,
        obs_noise_cov: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fcerr_bias: Option<Vec<f64>>,
        fcerr_cov: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForecastFile {
    Gaussian { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
    MvGaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelFile,
    pub forecast: ForecastFile,
    pub score: String,
    pub corrections: Vec<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub stream: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<GridFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Also write the variance-ordering report.
    #[serde(default)]
    pub inequality: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))
    }

    /// SHA-256 (hex) of the canonical JSON form with the given effective seed.
    /// Output location and format do not enter the hash.
    pub fn hash(&self, seed: u64) -> String {
        let canonical = ConfigFile {
            seed: Some(seed),
            out: None,
            format: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_experiment(&self, seed: u64) -> CliResult<ExperimentConfig> {
        let score_kind = parse_score(&self.score)?;
        let corrections = self
            .corrections
            .iter()
            .map(|c| ScoreStream::parse(c).ok_or_else(|| CliError::usage(format!("unknown correction {c:?}"))))
            .collect::<CliResult<Vec<_>>>()?;
        let mut sorted = corrections.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != corrections.len() {
            return Err(CliError::usage("corrections contain duplicates"));
        }
        let mut cfg = ExperimentConfig::new(
            self.model.build().map_err(usage)?,
            self.forecast.build().map_err(usage)?,
            score_kind,
            &sorted,
            self.n,
            RngSeed::new(seed, self.stream),
        )
        .map_err(usage)?;
        cfg.density_grid = self.density_grid.map(|g| DensityGrid {
            lo: g.lo,
            hi: g.hi,
            points: g.points,
        });
        cfg.bandwidth = self.bandwidth;
        if let Some(tol) = self.rel_tol {
            cfg.quadrature = QuadratureSpec::with_tolerance(tol);
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

/// Everything wrong in a config file is a usage error, including parameter values.
fn usage(e: scorelab_core::Error) -> CliError {
    CliError::usage(e.to_string())
}

pub fn parse_score(s: &str) -> CliResult<ScoreKind> {
    match s {
        "log" => Ok(ScoreKind::Log),
        "crps" => Ok(ScoreKind::Crps),
        other => Err(CliError::usage(format!("unknown score {other:?} (expected log or crps)"))),
    }
}

pub(crate) fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::usage(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn build(&self) -> scorelab_core::Result<ModelSpec> {
        Ok(match self {
            ModelFile::AdditiveGaussian {
                truth_mean,
                truth_var,
                omega2,
            } => ModelSpec::AdditiveGaussian(ModelA::new(GaussianParams::new(*truth_mean, *truth_var)?, *omega2)?),
            ModelFile::MultiplicativeGamma {
                truth_shape,
                truth_rate,
                err_shape,
                err_scale,
            } => ModelSpec::MultiplicativeGamma(ModelB::new(
                GammaParams::new(*truth_shape, *truth_rate)?,
                InvGammaParams::new(*err_shape, *err_scale)?,
            )?),
            ModelFile::Eiv {
                truth_mean,
                truth_cov,
                obs_bias,
                obs_noise_cov,
                fcerr_bias,
                fcerr_cov,
            } => {
                let d = truth_mean.len();
                let m = |rows: &Vec<Vec<f64>>, what: &str| {
                    matrix(rows, what).map_err(|e| scorelab_core::Error::Config(e.to_string()))
                };
                let bias = |b: &Option<Vec<f64>>| b.clone().map(DVector::from_vec).unwrap_or_else(|| DVector::zeros(d));
                ModelSpec::Eiv(EivModel::new(
                    MvGaussianParams::new(DVector::from_vec(truth_mean.clone()), m(truth_cov, "truth_cov")?)?,
                    bias(obs_bias),
                    m(obs_noise_cov, "obs_noise_cov")?,
                    bias(fcerr_bias),
                    m(fcerr_cov, "fcerr_cov")?,
                )?)
            }
        })
    }
}

impl ForecastFile {
    pub fn build(&self) -> scorelab_core::Result<Forecast> {
        Ok(match self {
            ForecastFile::Gaussian { mean, sd } => Forecast::Gaussian(GaussianParams::from_sd(*mean, *sd)?),
            ForecastFile::Gamma { shape, rate } => Forecast::Gamma(GammaParams::new(*shape, *rate)?),
            ForecastFile::MvGaussian { mean, cov } => Forecast::MvGaussian(MvGaussianParams::new(
                DVector::from_vec(mean.clone()),
                matrix(cov, "cov").map_err(|e| scorelab_core::Error::Config(e.to_string()))?,
            )?),
        })
    }
}
