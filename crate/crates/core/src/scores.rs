//! Base and observation-error-corrected scoring rules.
//!
//! All scores are negatively oriented. Two families of corrections appear:
//!
//! * the *wedge* correction `s∧(f, y)`, defined implicitly by
//!   `E[s∧(f, Y) | X = x] = s₀(f, x)`;
//! * the *vee* correction `s∨(f, y) = E[s₀(f, X) | Y = y]`, the posterior
//!   expectation of the base score (and its joint version conditioning on an
//!   auxiliary forecast `z` as well).
//!
//! Closed forms are given wherever they exist; [`mc_vee_score`] evaluates the
//! vee correction for any base score by Monte Carlo over posterior draws and
//! serves as the cross-check for every closed form.

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::distributions::{chunk_layout, Draw, GammaParams, GaussianParams, MvGaussianParams, RngSeed};
use crate::error::{domain, ensure_finite, Error, Result};
use crate::experiments::stats::Moments;
use crate::linalg::check_len;
use crate::models::{EivModel, ModelA, ModelB};
use crate::numerics::{big_phi_bar, gamma_q, integrate_semi_infinite_scaled, lgamma, phi, psi, Quadrature, QuadratureSpec};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Log,
    Crps,
}

impl ScoreKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreKind::Log => "log",
            ScoreKind::Crps => "crps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correction {
    None,
    Wedge,
    Vee,
    /// Vee correction conditioning on both the observation and an auxiliary forecast.
    VeeJoint,
}

impl Correction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Correction::None => "none",
            Correction::Wedge => "wedge",
            Correction::Vee => "vee",
            Correction::VeeJoint => "vee-joint",
        }
    }
}

/// A score evaluation. `numeric_error` is zero for closed forms and carries
/// the quadrature or Monte Carlo error estimate otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreValue {
    pub value: f64,
    pub score_kind: ScoreKind,
    pub correction: Correction,
    pub numeric_error: f64,
}

impl ScoreValue {
    fn exact(value: f64, score_kind: ScoreKind, correction: Correction) -> Result<Self> {
        if !value.is_finite() {
            return Err(domain("score evaluated to a non-finite value"));
        }
        Ok(Self {
            value,
            score_kind,
            correction,
            numeric_error: 0.0,
        })
    }
}

/// Predictive distribution being scored.
#[derive(Debug, Clone, PartialEq)]
pub enum Forecast {
    Gaussian(GaussianParams),
    Gamma(GammaParams),
    MvGaussian(MvGaussianParams),
}

impl Forecast {
    /// Base score `s₀(f, x)` of a scalar forecast.
    pub fn score(&self, kind: ScoreKind, x: f64) -> Result<f64> {
        match (self, kind) {
            (Forecast::Gaussian(f), ScoreKind::Log) => log_score_gaussian(f, x).map(|s| s.value),
            (Forecast::Gaussian(f), ScoreKind::Crps) => crps_gaussian(f, x).map(|s| s.value),
            (Forecast::Gamma(f), ScoreKind::Log) => log_score_gamma(f, x).map(|s| s.value),
            (Forecast::Gamma(f), ScoreKind::Crps) => crps_gamma(f, x).map(|s| s.value),
            (Forecast::MvGaussian(f), ScoreKind::Log) => {
                log_score_mv_gaussian(f, &DVector::from_element(1, x)).map(|s| s.value)
            }
            (Forecast::MvGaussian(_), ScoreKind::Crps) => Err(domain("CRPS is only defined here for scalar forecasts")),
        }
    }
}

fn check_forecast_gaussian(f: &GaussianParams) -> Result<()> {
    f.validate(false)
}

/// Logarithmic score `log σ + (x−μ)²/(2σ²) + ½ log 2π`.
pub fn log_score_gaussian(f: &GaussianParams, x: f64) -> Result<ScoreValue> {
    check_forecast_gaussian(f)?;
    ensure_finite(x, "x")?;
    let d = x - f.mean;
    let v = 0.5 * f.variance.ln() + d * d / (2.0 * f.variance) + HALF_LN_2PI;
    ScoreValue::exact(v, ScoreKind::Log, Correction::None)
}

/// Wedge-corrected log score for additive noise of variance `omega2`:
/// `log σ + ((y−μ)² − ω²)/(2σ²) + ½ log 2π`. Not bounded below.
pub fn wedge_log_score_gaussian(f: &GaussianParams, y: f64, omega2: f64) -> Result<ScoreValue> {
    check_forecast_gaussian(f)?;
    ensure_finite(y, "y")?;
    ensure_finite(omega2, "omega2")?;
    if omega2 < 0.0 {
        return Err(domain("noise variance must be nonnegative"));
    }
    let d = y - f.mean;
    let v = 0.5 * f.variance.ln() + (d * d - omega2) / (2.0 * f.variance) + HALF_LN_2PI;
    ScoreValue::exact(v, ScoreKind::Log, Correction::Wedge)
}

/// `E[s₀(f, X)]` for `X ~ law`: `log σ + (b² + (a−μ)²)/(2σ²) + ½ log 2π`.
pub fn expected_log_score_gaussian(f: &GaussianParams, law: &GaussianParams) -> Result<f64> {
    check_forecast_gaussian(f)?;
    law.validate(true)?;
    let d = law.mean - f.mean;
    Ok(0.5 * f.variance.ln() + (law.variance + d * d) / (2.0 * f.variance) + HALF_LN_2PI)
}

/// Vee-corrected log score under Model A, `E[s₀(f, X) | Y = y]`.
pub fn vee_log_score_gaussian(f: &GaussianParams, y: f64, model: &ModelA) -> Result<ScoreValue> {
    let post = model.posterior(y)?;
    let v = expected_log_score_gaussian(f, &post)?;
    ScoreValue::exact(v, ScoreKind::Log, Correction::Vee)
}

/// Gaussian CRPS, `x + 2σ[φ(v) − vΦ̄(v)] − (μ + σ/√π)` with `v = (x−μ)/σ`,
/// evaluated in the centred form `σ[v(1 − 2Φ̄(v)) + 2φ(v) − 1/√π]`.
pub fn crps_gaussian(f: &GaussianParams, x: f64) -> Result<ScoreValue> {
    check_forecast_gaussian(f)?;
    ensure_finite(x, "x")?;
    let sd = f.sd();
    let v = (x - f.mean) / sd;
    let c = sd * (v * (1.0 - 2.0 * big_phi_bar(v)) + 2.0 * phi(v) - FRAC_1_SQRT_PI);
    ScoreValue::exact(c, ScoreKind::Crps, Correction::None)
}

/// `E[c₀(f, X)]` for `X ~ N(a, b²)`:
/// `a + 2[s·φ(u) − (a−μ)Φ̄(u)] − (μ + σ/√π)`, `s = √(σ² + b²)`, `u = (a−μ)/s`.
///
/// For `b = 0` this is the Gaussian CRPS at `a`.
pub fn crps_expectation_gaussian(f: &GaussianParams, law: &GaussianParams) -> Result<f64> {
    check_forecast_gaussian(f)?;
    law.validate(true)?;
    let s = (f.variance + law.variance).sqrt();
    let d = law.mean - f.mean;
    let u = d / s;
    Ok(d * (1.0 - 2.0 * big_phi_bar(u)) + 2.0 * s * phi(u) - f.sd() * FRAC_1_SQRT_PI)
}

/// Vee-corrected CRPS under Model A: the Gaussian CRPS expectation over
/// `[X | Y = y]`, i.e. a CRPS-like form in `ȳ` with spread
/// `σ_ω² = σ² + ω²σ₀²/(σ₀²+ω²)`.
pub fn vee_crps_gaussian(f: &GaussianParams, y: f64, model: &ModelA) -> Result<ScoreValue> {
    let post = model.posterior(y)?;
    let v = crps_expectation_gaussian(f, &post)?;
    ScoreValue::exact(v, ScoreKind::Crps, Correction::Vee)
}

/// Log score of a gamma forecast, `(1−α) log x + βx − α log β + log Γ(α)`.
pub fn log_score_gamma(f: &GammaParams, x: f64) -> Result<ScoreValue> {
    f.validate()?;
    ensure_finite(x, "x")?;
    if x <= 0.0 {
        return Err(domain(alloc::format!("gamma scores need x > 0, got {x}")));
    }
    let v = (1.0 - f.shape) * x.ln() + f.rate * x - f.shape * f.rate.ln() + lgamma(f.shape);
    ScoreValue::exact(v, ScoreKind::Log, Correction::None)
}

/// `E[s₀(f, X)]` for `X ~ Gamma(k, r)`, using `E[log X] = ψ(k) − log r`.
pub fn expected_log_score_gamma(f: &GammaParams, law: &GammaParams) -> Result<f64> {
    f.validate()?;
    law.validate()?;
    Ok((1.0 - f.shape) * (psi(law.shape) - law.rate.ln()) + f.rate * law.shape / law.rate - f.shape * f.rate.ln()
        + lgamma(f.shape))
}

/// Vee-corrected log score under Model B:
/// `(1−α)(ψ(α₀+a) − log(β₀+b/y)) + β(α₀+a)/(β₀+b/y) − α log β + log Γ(α)`.
pub fn vee_log_score_gamma(f: &GammaParams, y: f64, model: &ModelB) -> Result<ScoreValue> {
    let post = model.posterior(y)?;
    let v = expected_log_score_gamma(f, &post)?;
    ScoreValue::exact(v, ScoreKind::Log, Correction::Vee)
}

fn half_mean_gini_gamma(f: &GammaParams) -> f64 {
    // ½ E|Z − Z'| = 1 / (β B(½, α))
    let ln_b = lgamma(0.5) + lgamma(f.shape) - lgamma(f.shape + 0.5);
    (-ln_b).exp() / f.rate
}

/// CRPS of a gamma forecast:
/// `(x − α/β) − 1/(β B(½, α)) + 2[(x/β) f(x) + (α/β − x) F̄(x)]`,
/// where `f`, `F̄` are the forecast density and survival function.
pub fn crps_gamma(f: &GammaParams, x: f64) -> Result<ScoreValue> {
    f.validate()?;
    ensure_finite(x, "x")?;
    if x <= 0.0 {
        return Err(domain(alloc::format!("gamma scores need x > 0, got {x}")));
    }
    let m = f.mean();
    let sf = gamma_q(f.shape, f.rate * x);
    let v = (x - m) * (1.0 - 2.0 * sf) + 2.0 * (x / f.rate) * f.pdf(x) - half_mean_gini_gamma(f);
    ScoreValue::exact(v, ScoreKind::Crps, Correction::None)
}

/// Vee-corrected gamma CRPS under Model B, the expectation of [`crps_gamma`]
/// over the posterior `Gamma(k, r)` with `k = α₀ + a`, `r = β₀ + b/y`:
///
/// `(k/r − α/β) − 1/(β B(½,α)) + 2 β^(α−1) r^k / (B(α,k) (β+r)^(α+k))
///   + 2 r^k/(Γ(α)Γ(k)) ∫₀^∞ (α/β − x) Γ(α, βx) x^(k−1) e^(−rx) dx`.
///
/// The last integral is evaluated by adaptive quadrature; twice its error
/// estimate is reported in `numeric_error`.
pub fn vee_crps_gamma(f: &GammaParams, y: f64, model: &ModelB, spec: &QuadratureSpec) -> Result<ScoreValue> {
    f.validate()?;
    let post = model.posterior(y)?;
    let (alpha, beta) = (f.shape, f.rate);
    let (k, r) = (post.shape, post.rate);
    let m = f.mean();

    let ln_beta_ak = lgamma(alpha) + lgamma(k) - lgamma(alpha + k);
    let density_term =
        ((alpha - 1.0) * beta.ln() + k * r.ln() - ln_beta_ak - (alpha + k) * (beta + r).ln()).exp();

    // r^k/(Γ(α)Γ(k)) · Γ(α, βx) x^(k−1) e^(−rx) = Q(α, βx) · posterior density
    let integral = integrate_semi_infinite_scaled(
        |x| {
            let dens = post.pdf(x);
            if dens == 0.0 {
                0.0
            } else {
                (m - x) * gamma_q(alpha, beta * x) * dens
            }
        },
        post.mean(),
        spec,
    )?;

    let value = (post.mean() - m) - half_mean_gini_gamma(f) + 2.0 * density_term + 2.0 * integral.value;
    if !value.is_finite() {
        return Err(domain("score evaluated to a non-finite value"));
    }
    Ok(ScoreValue {
        value,
        score_kind: ScoreKind::Crps,
        correction: Correction::Vee,
        numeric_error: 2.0 * integral.error_estimate,
    })
}

/// `E[c₀(f, X)]` for `X ~ law`, by quadrature of the gamma CRPS against the law's density.
pub fn expected_crps_gamma(f: &GammaParams, law: &GammaParams, spec: &QuadratureSpec) -> Result<Quadrature> {
    f.validate()?;
    law.validate()?;
    let m = f.mean();
    let gini = half_mean_gini_gamma(f);
    integrate_semi_infinite_scaled(
        |x| {
            let dens = law.pdf(x);
            if dens == 0.0 {
                return 0.0;
            }
            let c = (x - m) * (1.0 - 2.0 * gamma_q(f.shape, f.rate * x)) + 2.0 * (x / f.rate) * f.pdf(x) - gini;
            c * dens
        },
        law.mean(),
        spec,
    )
}

/// Multivariate Gaussian log score `½ log det Σ + (d/2) log 2π + ½ (x−μ)'Σ⁻¹(x−μ)`.
pub fn log_score_mv_gaussian(f: &MvGaussianParams, x: &DVector<f64>) -> Result<ScoreValue> {
    let q = f.mahalanobis_sq(x)?;
    let d = f.dim() as f64;
    let v = 0.5 * f.log_det() + d * HALF_LN_2PI + 0.5 * q;
    ScoreValue::exact(v, ScoreKind::Log, Correction::None)
}

/// `E[s₀(f, X)]` for `X ~ N(m, C)`:
/// `½ tr(Σ⁻¹(C + (m−μ)(m−μ)')) + (d/2) log 2π + ½ log det Σ`.
pub fn expected_log_score_mv_gaussian(f: &MvGaussianParams, law: &MvGaussianParams) -> Result<f64> {
    if f.dim() != law.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            found: law.dim(),
        });
    }
    let tr = trace_of_product(&f.precision(), law.covariance());
    Ok(0.5 * f.log_det() + f.dim() as f64 * HALF_LN_2PI + 0.5 * (tr + f.mahalanobis_sq(law.mean())?))
}

/// Precomputed pieces of the vee-corrected multivariate log score for one
/// (forecast, model) pair. The posterior covariances do not depend on the
/// data, so their trace terms are computed once.
#[derive(Debug, Clone)]
pub struct EivLogScorer {
    forecast: MvGaussianParams,
    model: EivModel,
    constant: f64,
    joint_trace: f64,
    obs_only_trace: f64,
}

fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(&b.transpose()).sum()
}

impl EivLogScorer {
    pub fn new(forecast: &MvGaussianParams, model: &EivModel) -> Result<Self> {
        if forecast.dim() != model.dim() {
            return Err(Error::Dimension {
                expected: model.dim(),
                found: forecast.dim(),
            });
        }
        let prec = forecast.precision();
        Ok(Self {
            constant: 0.5 * forecast.log_det() + forecast.dim() as f64 * HALF_LN_2PI,
            joint_trace: trace_of_product(&prec, model.posterior_covariance()),
            obs_only_trace: trace_of_product(&prec, model.obs_only_covariance()),
            forecast: forecast.clone(),
            model: model.clone(),
        })
    }

    /// `½ tr(Σ⁻¹(C + (x̄−μ)(x̄−μ)')) + (d/2) log 2π + ½ log det Σ` with
    /// `(x̄, C)` the moments of `[X | Y = y, Z = z]`.
    pub fn joint(&self, y: &DVector<f64>, z: &DVector<f64>) -> Result<f64> {
        let mean = self.model.posterior_mean(y, z)?;
        Ok(self.constant + 0.5 * (self.joint_trace + self.forecast.mahalanobis_sq(&mean)?))
    }

    /// Same with `[X | Y = y]` only.
    pub fn obs_only(&self, y: &DVector<f64>) -> Result<f64> {
        let mean = self.model.obs_only_mean(y)?;
        Ok(self.constant + 0.5 * (self.obs_only_trace + self.forecast.mahalanobis_sq(&mean)?))
    }

    /// Base score `s₀(f, x)`.
    pub fn base(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.constant + 0.5 * self.forecast.mahalanobis_sq(x)?)
    }
}

/// Vee-corrected multivariate log score under the error-in-variables model,
/// conditioning on both `y` and `z`.
pub fn eiv_vee_log_score(f: &MvGaussianParams, y: &DVector<f64>, z: &DVector<f64>, model: &EivModel) -> Result<ScoreValue> {
    check_len(y, model.dim())?;
    check_len(z, model.dim())?;
    let v = EivLogScorer::new(f, model)?.joint(y, z)?;
    ScoreValue::exact(v, ScoreKind::Log, Correction::VeeJoint)
}

/// Vee-corrected multivariate log score conditioning on `y` alone.
pub fn eiv_vee_log_score_obs_only(f: &MvGaussianParams, y: &DVector<f64>, model: &EivModel) -> Result<ScoreValue> {
    let v = EivLogScorer::new(f, model)?.obs_only(y)?;
    ScoreValue::exact(v, ScoreKind::Log, Correction::Vee)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Monte Carlo version of the vee correction: the mean of `base_score` over
/// `n` draws from `posterior`, with its standard error.
///
/// Deterministic in `seed`; draws are generated in fixed-size chunks on
/// derived streams.
pub fn mc_vee_score<D, F>(mut base_score: F, posterior: &D, n: usize, seed: RngSeed) -> Result<McEstimate>
where
    D: Draw,
    F: FnMut(&D::Output) -> Result<f64>,
{
    if n < 2 {
        return Err(domain("Monte Carlo correction needs at least 2 draws"));
    }
    let mut values = alloc::vec::Vec::with_capacity(n);
    for (k, range) in chunk_layout(n) {
        let mut rng = seed.chunk_rng(k);
        for _ in range {
            let x = posterior.draw(&mut rng);
            values.push(base_score(&x)?);
        }
    }
    let m = Moments::from_samples(&values);
    Ok(McEstimate {
        estimate: m.mean,
        std_error: m.mean_std_error(),
        n,
    })
}
