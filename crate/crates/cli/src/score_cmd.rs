//! `scorelab score`: one score from command-line parameters.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use scorelab_core::distributions::{GammaParams, GaussianParams, InvGammaParams, MvGaussianParams};
use scorelab_core::models::{EivModel, ModelA, ModelB};
use scorelab_core::numerics::QuadratureSpec;
use scorelab_core::scores::{self, ScoreKind, ScoreValue};

use crate::args::{CorrectionArg, ModelArg, ScoreArg, ScoreArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct ScoreOutput {
    pub value: f64,
    pub numeric_error: f64,
    pub score_kind: &'static str,
    pub correction: &'static str,
}

impl From<ScoreValue> for ScoreOutput {
    fn from(v: ScoreValue) -> Self {
        Self {
            value: v.value,
            numeric_error: v.numeric_error,
            score_kind: v.score_kind.as_str(),
            correction: v.correction.as_str(),
        }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::usage(format!("--{flag} is required here")))
}

fn scalar(v: &[f64], flag: &str) -> CliResult<f64> {
    match v {
        [x] => Ok(*x),
        [] => Err(CliError::usage(format!("--{flag} is required here"))),
        _ => Err(CliError::usage(format!("--{flag} takes a single value here"))),
    }
}

fn vector(v: &[f64], flag: &str) -> CliResult<DVector<f64>> {
    if v.is_empty() {
        return Err(CliError::usage(format!("--{flag} is required here")));
    }
    Ok(DVector::from_column_slice(v))
}

fn square(v: &[f64], d: usize, flag: &str) -> CliResult<DMatrix<f64>> {
    if v.len() != d * d {
        return Err(CliError::usage(format!("--{flag} needs {} entries for dimension {d}", d * d)));
    }
    Ok(DMatrix::from_row_slice(d, d, v))
}

fn gaussian_forecast(a: &ScoreArgs) -> CliResult<GaussianParams> {
    Ok(GaussianParams::from_sd(scalar(&a.fc_mean, "fc-mean")?, need(a.fc_sd, "fc-sd")?)?)
}

fn gamma_forecast(a: &ScoreArgs) -> CliResult<GammaParams> {
    Ok(GammaParams::new(need(a.fc_shape, "fc-shape")?, need(a.fc_rate, "fc-rate")?)?)
}

fn mv_forecast(a: &ScoreArgs) -> CliResult<MvGaussianParams> {
    let mean = vector(&a.fc_mean, "fc-mean")?;
    let d = mean.len();
    Ok(MvGaussianParams::new(mean, square(&a.fc_cov, d, "fc-cov")?)?)
}

fn quadrature(a: &ScoreArgs) -> CliResult<QuadratureSpec> {
    let spec = a.rel_tol.map(QuadratureSpec::with_tolerance).unwrap_or_default();
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(spec)
}

fn unsupported(a: &ScoreArgs) -> CliError {
    CliError::usage(format!(
        "correction {:?} is not available for the {:?} score under model {:?}",
        a.correction, a.score, a.model
    ))
}

pub fn evaluate(a: &ScoreArgs) -> CliResult<ScoreValue> {
    let kind = match a.score {
        ScoreArg::Log => ScoreKind::Log,
        ScoreArg::Crps => ScoreKind::Crps,
    };
    match a.model {
        ModelArg::None => {
            // The wedge correction depends on the noise model only through ω².
            if a.correction == CorrectionArg::Wedge && a.omega2.is_some() {
                if kind != ScoreKind::Log {
                    return Err(unsupported(a));
                }
                let f = gaussian_forecast(a)?;
                return Ok(scores::wedge_log_score_gaussian(&f, scalar(&a.obs, "obs")?, need(a.omega2, "omega2")?)?);
            }
            if a.correction != CorrectionArg::None {
                return Err(CliError::usage("this correction requires a noise model (--model)"));
            }
            let gamma = a.fc_shape.is_some() || a.fc_rate.is_some();
            if gamma {
                let f = gamma_forecast(a)?;
                let y = scalar(&a.obs, "obs")?;
                return Ok(match kind {
                    ScoreKind::Log => scores::log_score_gamma(&f, y)?,
                    ScoreKind::Crps => scores::crps_gamma(&f, y)?,
                });
            }
            if !a.fc_cov.is_empty() {
                if kind == ScoreKind::Crps {
                    return Err(CliError::usage("the CRPS is only available for scalar forecasts"));
                }
                let f = mv_forecast(a)?;
                return Ok(scores::log_score_mv_gaussian(&f, &vector(&a.obs, "obs")?)?);
            }
            let f = gaussian_forecast(a)?;
            let y = scalar(&a.obs, "obs")?;
            Ok(match kind {
                ScoreKind::Log => scores::log_score_gaussian(&f, y)?,
                ScoreKind::Crps => scores::crps_gaussian(&f, y)?,
            })
        }
        ModelArg::AdditiveGaussian => {
            let f = gaussian_forecast(a)?;
            let y = scalar(&a.obs, "obs")?;
            let omega2 = need(a.omega2, "omega2")?;
            let model = || -> CliResult<ModelA> {
                let truth = GaussianParams::new(scalar(&a.truth_mean, "truth-mean")?, need(a.truth_var, "truth-var")?)?;
                Ok(ModelA::new(truth, omega2)?)
            };
            Ok(match (kind, a.correction) {
                (ScoreKind::Log, CorrectionArg::None) => scores::log_score_gaussian(&f, y)?,
                (ScoreKind::Crps, CorrectionArg::None) => scores::crps_gaussian(&f, y)?,
                (ScoreKind::Log, CorrectionArg::Wedge) => scores::wedge_log_score_gaussian(&f, y, omega2)?,
                (ScoreKind::Log, CorrectionArg::Vee) => scores::vee_log_score_gaussian(&f, y, &model()?)?,
                (ScoreKind::Crps, CorrectionArg::Vee) => scores::vee_crps_gaussian(&f, y, &model()?)?,
                _ => return Err(unsupported(a)),
            })
        }
        ModelArg::MultiplicativeGamma => {
            let f = gamma_forecast(a)?;
            let y = scalar(&a.obs, "obs")?;
            let model = || -> CliResult<ModelB> {
                Ok(ModelB::new(
                    GammaParams::new(need(a.truth_shape, "truth-shape")?, need(a.truth_rate, "truth-rate")?)?,
                    InvGammaParams::new(need(a.err_shape, "err-shape")?, need(a.err_scale, "err-scale")?)?,
                )?)
            };
            Ok(match (kind, a.correction) {
                (ScoreKind::Log, CorrectionArg::None) => scores::log_score_gamma(&f, y)?,
                (ScoreKind::Crps, CorrectionArg::None) => scores::crps_gamma(&f, y)?,
                (ScoreKind::Log, CorrectionArg::Vee) => scores::vee_log_score_gamma(&f, y, &model()?)?,
                (ScoreKind::Crps, CorrectionArg::Vee) => scores::vee_crps_gamma(&f, y, &model()?, &quadrature(a)?)?,
                _ => return Err(unsupported(a)),
            })
        }
        ModelArg::Eiv => {
            if kind != ScoreKind::Log {
                return Err(CliError::usage("only the log score is available under the EIV model"));
            }
            let f = mv_forecast(a)?;
            let d = f.dim();
            let y = vector(&a.obs, "obs")?;
            let model = || -> CliResult<EivModel> {
                let truth_mean = vector(&a.truth_mean, "truth-mean")?;
                let bias = |v: &[f64], flag: &str| -> CliResult<DVector<f64>> {
                    if v.is_empty() {
                        Ok(DVector::zeros(d))
                    } else {
                        vector(v, flag)
                    }
                };
                Ok(EivModel::new(
                    MvGaussianParams::new(truth_mean, square(&a.truth_cov, d, "truth-cov")?)?,
                    bias(&a.obs_bias, "obs-bias")?,
                    square(&a.obs_noise_cov, d, "obs-noise-cov")?,
                    bias(&a.fcerr_bias, "fcerr-bias")?,
                    square(&a.fcerr_cov, d, "fcerr-cov")?,
                )?)
            };
            Ok(match a.correction {
                CorrectionArg::None => scores::log_score_mv_gaussian(&f, &y)?,
                CorrectionArg::Vee => scores::eiv_vee_log_score_obs_only(&f, &y, &model()?)?,
                CorrectionArg::VeeJoint => {
                    let z = vector(&a.fc_obs, "fc-obs")?;
                    scores::eiv_vee_log_score(&f, &y, &z, &model()?)?
                }
                CorrectionArg::Wedge => return Err(unsupported(a)),
            })
        }
    }
}

pub fn run(a: &ScoreArgs) -> CliResult<String> {
    let v = evaluate(a)?;
    Ok(serde_json::to_string(&ScoreOutput::from(v)).expect("score output serializes"))
}
