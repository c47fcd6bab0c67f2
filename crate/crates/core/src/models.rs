//! Noise models linking the hidden truth `x` to the verification data `y`
//! (and, for the error-in-variables system, to an auxiliary forecast `z`),
//! together with the exact posterior laws `[X | Y = y]`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{sample_n, Draw, GammaParams, GaussianParams, InvGammaParams, MvGaussianParams, RngSeed};
use crate::error::{domain, ensure_finite, Result};
use crate::linalg::{check_len, Spd};

/// Additive Gaussian error: `X ~ N(μ₀, σ₀²)`, `Y = X + N(0, ω²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelA {
    pub truth: GaussianParams,
    pub noise_variance: f64,
}

impl ModelA {
    pub fn new(truth: GaussianParams, noise_variance: f64) -> Result<Self> {
        let m = Self { truth, noise_variance };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.truth.validate(false)?;
        ensure_finite(self.noise_variance, "noise variance")?;
        if self.noise_variance < 0.0 {
            return Err(domain("noise variance must be nonnegative"));
        }
        Ok(())
    }

    /// Weight `σ₀² / (σ₀² + ω²)` given to the observation in the posterior mean.
    pub fn observation_weight(&self) -> f64 {
        self.truth.variance / (self.truth.variance + self.noise_variance)
    }

    /// `[X | Y = y] = N(ȳ, ω²σ₀²/(σ₀²+ω²))` with
    /// `ȳ = ω²/(σ₀²+ω²)·μ₀ + σ₀²/(σ₀²+ω²)·y`.
    ///
    /// With `ω² = 0` the observation is exact and the posterior is the point mass at `y`.
    pub fn posterior(&self, y: f64) -> Result<GaussianParams> {
        ensure_finite(y, "y")?;
        if self.noise_variance == 0.0 {
            return GaussianParams::point_mass(y);
        }
        let (s0, w2) = (self.truth.variance, self.noise_variance);
        let total = s0 + w2;
        Ok(GaussianParams {
            mean: (w2 / total) * self.truth.mean + (s0 / total) * y,
            variance: w2 * s0 / total,
        })
    }

    /// Marginal law of the observation, `N(μ₀, σ₀² + ω²)`.
    pub fn marginal_y(&self) -> GaussianParams {
        GaussianParams {
            mean: self.truth.mean,
            variance: self.truth.variance + self.noise_variance,
        }
    }
}

impl Draw for ModelA {
    /// `(x, y)`
    type Output = (f64, f64);
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x = self.truth.draw(rng);
        let e: f64 = rng.sample(StandardNormal);
        (x, x + self.noise_variance.sqrt() * e)
    }
}

/// Multiplicative error: `X ~ Gamma(α₀, β₀)`, `Y = X·ε`, `ε ~ InvGamma(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelB {
    pub truth: GammaParams,
    pub error: InvGammaParams,
}

impl ModelB {
    pub fn new(truth: GammaParams, error: InvGammaParams) -> Result<Self> {
        truth.validate()?;
        error.validate()?;
        Ok(Self { truth, error })
    }

    /// Conjugate update `[X | Y = y] = Gamma(α₀ + a, β₀ + b/y)`.
    pub fn posterior(&self, y: f64) -> Result<GammaParams> {
        ensure_finite(y, "y")?;
        if y <= 0.0 {
            return Err(domain(alloc::format!("observation must be positive, got {y}")));
        }
        Ok(GammaParams {
            shape: self.truth.shape + self.error.shape,
            rate: self.truth.rate + self.error.scale / y,
        })
    }

    /// `[Y | X = x] = InvGamma(a, b·x)`, which follows from `Y = xε`.
    pub fn conditional_y(&self, x: f64) -> Result<InvGammaParams> {
        InvGammaParams::new(self.error.shape, self.error.scale * x)
    }
}

impl Draw for ModelB {
    /// `(x, y)`
    type Output = (f64, f64);
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x = self.truth.draw(rng);
        let e = self.error.draw(rng);
        (x, x * e)
    }
}

/// One joint draw of the error-in-variables system.
#[derive(Debug, Clone, PartialEq)]
pub struct EivDraw {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
}

/// Error-in-variables system
/// `X ~ N(μ_X, Σ_X)`, `Y = X + N(α, Δ)`, `Z = X + N(β, Ω)`.
///
/// The posterior covariances depend only on the model, so they are factorized
/// here once.
#[derive(Debug, Clone)]
pub struct EivModel {
    truth: MvGaussianParams,
    obs_bias: DVector<f64>,
    obs_cov: Spd,
    fc_bias: DVector<f64>,
    fc_cov: Spd,
    obs_lower: DMatrix<f64>,
    fc_lower: DMatrix<f64>,
    obs_prec: DMatrix<f64>,
    fc_prec: DMatrix<f64>,
    truth_prec_mean: DVector<f64>,
    joint_cov: DMatrix<f64>,
    obs_only_cov: DMatrix<f64>,
}

impl PartialEq for EivModel {
    fn eq(&self, other: &Self) -> bool {
        self.truth == other.truth
            && self.obs_bias == other.obs_bias
            && self.obs_cov() == other.obs_cov()
            && self.fc_bias == other.fc_bias
            && self.fc_cov() == other.fc_cov()
    }
}

fn inverse_of_sum(parts: &[&DMatrix<f64>], what: &str) -> Result<DMatrix<f64>> {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        acc += *p;
    }
    let sym = (&acc + acc.transpose()) * 0.5;
    Ok(Spd::new(sym, what)?.inverse())
}

impl EivModel {
    pub fn new(
        truth: MvGaussianParams,
        obs_bias: DVector<f64>,
        obs_cov: DMatrix<f64>,
        fc_bias: DVector<f64>,
        fc_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let d = truth.dim();
        check_len(&obs_bias, d)?;
        check_len(&fc_bias, d)?;
        if obs_bias.iter().chain(fc_bias.iter()).any(|v| !v.is_finite()) {
            return Err(domain("bias vectors must be finite"));
        }
        let obs_cov = Spd::new(obs_cov, "observation error covariance")?;
        let fc_cov = Spd::new(fc_cov, "forecast error covariance")?;
        check_len(&obs_bias, obs_cov.dim())?;
        check_len(&fc_bias, fc_cov.dim())?;
        let truth_prec = truth.precision();
        let obs_prec = obs_cov.inverse();
        let fc_prec = fc_cov.inverse();
        let joint_cov = inverse_of_sum(&[&obs_prec, &fc_prec, &truth_prec], "posterior precision")?;
        let obs_only_cov = inverse_of_sum(&[&obs_prec, &truth_prec], "posterior precision")?;
        let truth_prec_mean = &truth_prec * truth.mean();
        Ok(Self {
            obs_lower: obs_cov.lower(),
            fc_lower: fc_cov.lower(),
            truth,
            obs_bias,
            obs_cov,
            fc_bias,
            fc_cov,
            obs_prec,
            fc_prec,
            truth_prec_mean,
            joint_cov,
            obs_only_cov,
        })
    }

    pub fn dim(&self) -> usize {
        self.truth.dim()
    }

    pub fn truth(&self) -> &MvGaussianParams {
        &self.truth
    }

    pub fn obs_bias(&self) -> &DVector<f64> {
        &self.obs_bias
    }

    pub fn obs_cov(&self) -> &DMatrix<f64> {
        &self.obs_cov.matrix
    }

    pub fn fc_bias(&self) -> &DVector<f64> {
        &self.fc_bias
    }

    pub fn fc_cov(&self) -> &DMatrix<f64> {
        &self.fc_cov.matrix
    }

    /// `(Δ⁻¹ + Ω⁻¹ + Σ_X⁻¹)⁻¹`
    pub fn posterior_covariance(&self) -> &DMatrix<f64> {
        &self.joint_cov
    }

    /// `(Δ⁻¹ + Σ_X⁻¹)⁻¹`, the covariance of `[X | Y]` ignoring `Z`.
    pub fn obs_only_covariance(&self) -> &DMatrix<f64> {
        &self.obs_only_cov
    }

    /// Posterior mean `C [Δ⁻¹(y − α) + Ω⁻¹(z − β) + Σ_X⁻¹ μ_X]`.
    pub fn posterior_mean(&self, y: &DVector<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(y, self.dim())?;
        check_len(z, self.dim())?;
        let rhs = &self.obs_prec * (y - &self.obs_bias) + &self.fc_prec * (z - &self.fc_bias) + &self.truth_prec_mean;
        Ok(&self.joint_cov * rhs)
    }

    /// Mean of `[X | Y = y]` alone.
    pub fn obs_only_mean(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(y, self.dim())?;
        let rhs = &self.obs_prec * (y - &self.obs_bias) + &self.truth_prec_mean;
        Ok(&self.obs_only_cov * rhs)
    }

    /// `[X | Y = y, Z = z]`.
    pub fn posterior(&self, y: &DVector<f64>, z: &DVector<f64>) -> Result<MvGaussianParams> {
        MvGaussianParams::new(self.posterior_mean(y, z)?, self.joint_cov.clone())
    }

    /// `[X | Y = y]`.
    pub fn posterior_given_obs(&self, y: &DVector<f64>) -> Result<MvGaussianParams> {
        MvGaussianParams::new(self.obs_only_mean(y)?, self.obs_only_cov.clone())
    }
}

impl Draw for EivModel {
    type Output = EivDraw;
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> EivDraw {
        let d = self.dim();
        let x = self.truth.draw(rng);
        let ey = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ez = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &x + &self.obs_bias + &self.obs_lower * ey;
        let z = &x + &self.fc_bias + &self.fc_lower * ez;
        EivDraw { x, y, z }
    }
}

pub fn model_a_posterior(model: &ModelA, y: f64) -> Result<GaussianParams> {
    model.posterior(y)
}

pub fn model_a_marginal_y(model: &ModelA) -> GaussianParams {
    model.marginal_y()
}

pub fn model_b_posterior(model: &ModelB, y: f64) -> Result<GammaParams> {
    model.posterior(y)
}

pub fn eiv_posterior(model: &EivModel, y: &DVector<f64>, z: &DVector<f64>) -> Result<MvGaussianParams> {
    model.posterior(y, z)
}

/// `n` joint draws `(x, y)` from Model A.
pub fn sample_model_a(model: &ModelA, n: usize, seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    sample_n(model, n, seed)
}

/// `n` joint draws `(x, y)` from Model B.
pub fn sample_model_b(model: &ModelB, n: usize, seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    sample_n(model, n, seed)
}

/// `n` joint draws `(x, y, z)` from the error-in-variables system.
pub fn sample_eiv(model: &EivModel, n: usize, seed: RngSeed) -> Result<Vec<EivDraw>> {
    sample_n(model, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ks_statistic;
    use std::vec::Vec;

    const SEED: RngSeed = RngSeed::new(99, 3);

    fn fig1(noise: f64) -> ModelA {
        ModelA::new(GaussianParams::new(1.0, 4.0).unwrap(), noise).unwrap()
    }

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn m1(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    fn eiv1(fc_var: f64) -> EivModel {
        EivModel::new(
            MvGaussianParams::new(v1(0.0), m1(1.0)).unwrap(),
            v1(0.0),
            m1(1.0),
            v1(0.0),
            m1(fc_var),
        )
        .unwrap()
    }

    #[test]
    fn model_a_posterior_examples() {
        let p = fig1(0.0).posterior(2.7).unwrap();
        assert_eq!((p.mean, p.variance), (2.7, 0.0));
        let p = fig1(1.0).posterior(6.0).unwrap();
        assert!((p.mean - 5.0).abs() < 1e-14);
        assert!((p.variance - 0.8).abs() < 1e-14);
        let p = fig1(1e12).posterior(6.0).unwrap();
        assert!((p.mean - 1.0).abs() < 1e-6);
        assert!((p.variance - 4.0).abs() / 4.0 < 1e-6);
        assert!(ModelA::new(GaussianParams::new(0.0, 1.0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn model_a_posterior_mean_is_convex_combination() {
        let m = ModelA::new(GaussianParams::new(-2.0, 3.0).unwrap(), 0.7).unwrap();
        for i in 0..50 {
            let y = -10.0 + i as f64 * 0.4;
            let p = m.posterior(y).unwrap();
            let w = m.observation_weight();
            assert!((p.mean - ((1.0 - w) * -2.0 + w * y)).abs() < 1e-12);
            assert!(p.mean >= y.min(-2.0) - 1e-12 && p.mean <= y.max(-2.0) + 1e-12);
        }
    }

    #[test]
    fn model_a_marginal_and_sampler() {
        assert_eq!(fig1(0.0).marginal_y(), GaussianParams::new(1.0, 4.0).unwrap());
        let m = fig1(1.0);
        assert_eq!(m.marginal_y(), GaussianParams::new(1.0, 5.0).unwrap());
        let n = 1_000_000;
        let draws = sample_model_a(&m, n, SEED).unwrap();
        let ys: Vec<f64> = draws.iter().map(|d| d.1).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // sd of the sample variance is sqrt(2/n)·5
        assert!((var - 5.0).abs() < 4.0 * 5.0 * (2.0 / n as f64).sqrt());
        // tower property
        let post_mean = ys.iter().map(|&y| m.posterior(y).unwrap().mean).sum::<f64>() / n as f64;
        assert!((post_mean - 1.0).abs() < 4.0 * (0.8 * 4.0 / n as f64).sqrt());

        let exact = sample_model_a(&fig1(0.0), 1000, SEED).unwrap();
        assert!(exact.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn model_b_posterior_examples() {
        let m = ModelB::new(GammaParams::new(2.0, 1.0).unwrap(), InvGammaParams::new(3.0, 2.0).unwrap()).unwrap();
        assert_eq!(m.posterior(1.0).unwrap(), GammaParams::new(5.0, 3.0).unwrap());
        assert!((m.posterior(1e12).unwrap().rate - 1.0).abs() < 1e-9);
        assert!(m.posterior(0.0).is_err());
        assert!(m.posterior(-1.0).is_err());
        for &y in &[0.1, 1.0, 30.0] {
            assert_eq!(m.posterior(y).unwrap().shape, 5.0);
        }
    }

    #[test]
    fn model_b_posterior_matches_rejection_oracle() {
        // keep the x of joint draws whose y lands in a narrow window around 1
        let m = ModelB::new(GammaParams::new(2.0, 1.0).unwrap(), InvGammaParams::new(3.0, 2.0).unwrap()).unwrap();
        let draws = sample_model_b(&m, 2_000_000, SEED).unwrap();
        let kept: Vec<f64> = draws.iter().filter(|(_, y)| (y - 1.0).abs() < 0.01).map(|d| d.0).collect();
        assert!(kept.len() > 5_000, "{}", kept.len());
        let post = m.posterior(1.0).unwrap();
        assert!(ks_statistic(&kept, |x| post.cdf(x)).unwrap() < 0.05);
    }

    #[test]
    fn model_b_sampler_mean() {
        let m = ModelB::new(GammaParams::new(2.0, 1.0).unwrap(), InvGammaParams::new(6.0, 5.0).unwrap()).unwrap();
        let n = 1_000_000;
        let ys: Vec<f64> = sample_model_b(&m, n, SEED).unwrap().into_iter().map(|d| d.1).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
        // E[Y] = (α₀/β₀)(b/(a−1)) = 2
        assert!((mean - 2.0).abs() < 4.0 * (var / n as f64).sqrt());
        assert!(ys.iter().all(|&y| y > 0.0));
    }

    #[test]
    fn eiv_posterior_examples() {
        let m = eiv1(1.0);
        let p = m.posterior(&v1(0.0), &v1(0.0)).unwrap();
        assert!(p.mean()[0].abs() < 1e-15);
        assert!((p.covariance()[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        let p = m.posterior(&v1(3.0), &v1(0.0)).unwrap();
        assert!((p.mean()[0] - 1.0).abs() < 1e-14);
        assert!(m.posterior(&DVector::zeros(2), &v1(0.0)).is_err());

        let wide = eiv1(1e8);
        let a = ModelA::new(GaussianParams::new(0.0, 1.0).unwrap(), 1.0).unwrap();
        for &y in &[-2.0, 0.3, 4.0] {
            let p = wide.posterior(&v1(y), &v1(1.5)).unwrap();
            let q = a.posterior(y).unwrap();
            assert!((p.mean()[0] - q.mean).abs() < 1e-6);
            assert!((p.covariance()[(0, 0)] - q.variance).abs() < 1e-6);
        }
    }

    #[test]
    fn eiv_covariance_is_data_independent_and_spd() {
        let truth = MvGaussianParams::new(
            DVector::from_vec(std::vec![1.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        let m = EivModel::new(
            truth,
            DVector::from_vec(std::vec![0.1, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]),
            DVector::from_vec(std::vec![0.0, -0.2]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let a = m.posterior(&DVector::from_vec(std::vec![0.0, 1.0]), &DVector::zeros(2)).unwrap();
        let b = m.posterior(&DVector::from_vec(std::vec![5.0, -3.0]), &DVector::from_vec(std::vec![2.0, 2.0])).unwrap();
        assert_eq!(a.covariance(), b.covariance());
        let bad = EivModel::new(
            MvGaussianParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap(),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn eiv_sampler_covariances() {
        // with Ω huge, y and z share only the X channel: cov(y, z) = Σ_X
        let m = EivModel::new(
            MvGaussianParams::new(v1(0.0), m1(2.0)).unwrap(),
            v1(0.0),
            m1(1.0),
            v1(0.0),
            m1(1e4),
        )
        .unwrap();
        let n = 1_000_000;
        let draws = sample_eiv(&m, n, SEED).unwrap();
        let (sy, sz) = draws.iter().fold((0.0, 0.0), |(a, b), d| (a + d.y[0], b + d.z[0]));
        let (my, mz) = (sy / n as f64, sz / n as f64);
        let cov = draws.iter().map(|d| (d.y[0] - my) * (d.z[0] - mz)).sum::<f64>() / n as f64;
        // sd of the product moment is about sqrt(var_y var_z / n) = sqrt(3·1e4/n)
        assert!((cov - 2.0).abs() < 4.0 * (3.0 * 1e4 / n as f64).sqrt(), "{cov}");
    }
}
