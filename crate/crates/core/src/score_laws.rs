//! Exact laws of the Gaussian log scores under additive noise.
//!
//! With `f = N(μ, σ²)` and Model A, each of `s∧(f, Y)`, `s∨(f, Y)` and
//! `s₀(f, Y)` is an affine transform `a + b·χ²₁(λ)` of a noncentral
//! chi-squared variable with one degree of freedom.

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::distributions::{AffineNcChiSq, GaussianParams};
use crate::error::Result;
use crate::models::ModelA;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreLawTriple {
    pub law_wedge: AffineNcChiSq,
    pub law_vee: AffineNcChiSq,
    /// Law of the uncorrected score evaluated at the observation, `s₀(f, Y)`.
    pub law_base_on_marginal: AffineNcChiSq,
    /// `E[s∧(f, Y)] = E[s∨(f, Y)] = E[s₀(f, X)]`.
    pub common_mean: f64,
}

/// Mean of `s₀(f, X)` for `X ~ N(μ₀, σ₀²)`:
/// `log σ + (σ₀² + (μ₀ − μ)²)/(2σ²) + ½ log 2π`.
pub fn common_mean(f: &GaussianParams, model: &ModelA) -> Result<f64> {
    f.validate(false)?;
    model.validate()?;
    let d = model.truth.mean - f.mean;
    Ok(0.5 * f.variance.ln() + (model.truth.variance + d * d) / (2.0 * f.variance) + HALF_LN_2PI)
}

pub fn build_score_laws(f: &GaussianParams, model: &ModelA) -> Result<ScoreLawTriple> {
    let mean = common_mean(f, model)?;
    let (s2, s0, w2) = (f.variance, model.truth.variance, model.noise_variance);
    let d = model.truth.mean - f.mean;
    let total = s0 + w2;
    let q = s0 / total;
    let half_ln_s = 0.5 * s2.ln();

    let b_wedge = total / (2.0 * s2);
    let lambda_wedge = d * d / total;
    let law_wedge = AffineNcChiSq::new(half_ln_s - w2 / (2.0 * s2) + HALF_LN_2PI, b_wedge, lambda_wedge)?;

    let law_vee = AffineNcChiSq::new(
        half_ln_s + w2 * s0 / (2.0 * s2 * total) + HALF_LN_2PI,
        b_wedge * q * q,
        lambda_wedge / (q * q),
    )?;

    let law_base_on_marginal = AffineNcChiSq::new(half_ln_s + HALF_LN_2PI, b_wedge, lambda_wedge)?;

    Ok(ScoreLawTriple {
        law_wedge,
        law_vee,
        law_base_on_marginal,
        common_mean: mean,
    })
}

/// Law of the ideal score `s₀(f, X)`: `a₀ + b·χ²₁(λ)` with `b = σ₀²/(2σ²)`, `λ = (μ₀−μ)²/σ₀²`.
pub fn law_base_on_truth(f: &GaussianParams, model: &ModelA) -> Result<AffineNcChiSq> {
    f.validate(false)?;
    model.validate()?;
    let d = model.truth.mean - f.mean;
    AffineNcChiSq::new(
        0.5 * f.variance.ln() + HALF_LN_2PI,
        model.truth.variance / (2.0 * f.variance),
        d * d / model.truth.variance,
    )
}

/// `V[s∧(f, Y)] / V[s∨(f, Y)] = (1 + 2λ∧)/(p₀² + 2p₀λ∧)` with `p₀ = (σ₀²/(σ₀²+ω²))²`.
pub fn variance_ratio(f: &GaussianParams, model: &ModelA) -> Result<f64> {
    f.validate(false)?;
    model.validate()?;
    let total = model.truth.variance + model.noise_variance;
    let d = model.truth.mean - f.mean;
    let lambda = d * d / total;
    let q = model.truth.variance / total;
    let p0 = q * q;
    Ok((1.0 + 2.0 * lambda) / (p0 * p0 + 2.0 * p0 * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_n, RngSeed};
    use crate::experiments::ks_statistic;
    use crate::scores::{log_score_gaussian, vee_log_score_gaussian, wedge_log_score_gaussian};
    use proptest::prelude::*;
    use std::vec::Vec;

    fn g(m: f64, v: f64) -> GaussianParams {
        GaussianParams::new(m, v).unwrap()
    }

    fn right_panel() -> (GaussianParams, ModelA) {
        (g(0.0, 4.0), ModelA::new(g(1.0, 4.0), 1.0).unwrap())
    }

    #[test]
    fn right_panel_constants() {
        let (f, m) = right_panel();
        let laws = build_score_laws(&f, &m).unwrap();
        assert!((laws.law_wedge.noncentrality - 0.2).abs() < 1e-15);
        assert!((laws.law_vee.noncentrality - 0.3125).abs() < 1e-15);
        assert!((laws.common_mean - 2.237_085_713_764_618).abs() < 1e-13);
        assert!((laws.law_wedge.mean() - laws.common_mean).abs() < 1e-12);
        assert!((laws.law_vee.mean() - laws.common_mean).abs() < 1e-12);
        assert!((law_base_on_truth(&f, &m).unwrap().mean() - laws.common_mean).abs() < 1e-12);
    }

    #[test]
    fn left_panel_mean() {
        let laws = build_score_laws(&g(1.0, 4.0), &ModelA::new(g(1.0, 4.0), 1.0).unwrap()).unwrap();
        assert!((laws.common_mean - 2.112_085_713_764_618).abs() < 1e-13);
    }

    #[test]
    fn zero_noise_laws_coincide() {
        let laws = build_score_laws(&g(0.3, 2.0), &ModelA::new(g(-1.0, 3.0), 0.0).unwrap()).unwrap();
        assert_eq!(laws.law_wedge, laws.law_vee);
        assert_eq!(laws.law_wedge, laws.law_base_on_marginal);
        assert_eq!(variance_ratio(&g(0.3, 2.0), &ModelA::new(g(-1.0, 3.0), 0.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn variance_ratio_spot_value_and_routes() {
        let (f, m) = right_panel();
        let r = variance_ratio(&f, &m).unwrap();
        assert!((r - 2.103_365_384_615_384_6).abs() < 1e-12);
        let laws = build_score_laws(&f, &m).unwrap();
        assert!((r - laws.law_wedge.variance() / laws.law_vee.variance()).abs() < 1e-12);
    }

    #[test]
    fn variance_ratio_monotone_in_noise() {
        for &d in &[0.0, 0.5, 2.0] {
            for &s0 in &[0.5, 2.0, 5.0] {
                let f = g(0.0, 1.5);
                let mut prev = 1.0;
                for i in 0..200 {
                    let w2 = i as f64 * 0.05;
                    let r = variance_ratio(&f, &ModelA::new(g(d, s0), w2).unwrap()).unwrap();
                    assert!(r >= prev - 1e-12, "d={d} s0={s0} w2={w2}");
                    prev = r;
                }
            }
        }
    }

    #[test]
    fn empirical_laws_match() {
        let (f, m) = right_panel();
        let laws = build_score_laws(&f, &m).unwrap();
        let draws = sample_n(&m, 100_000, RngSeed::new(2024, 3)).unwrap();
        let mut wedge = Vec::new();
        let mut vee = Vec::new();
        let mut base = Vec::new();
        for &(_, y) in &draws {
            wedge.push(wedge_log_score_gaussian(&f, y, 1.0).unwrap().value);
            vee.push(vee_log_score_gaussian(&f, y, &m).unwrap().value);
            base.push(log_score_gaussian(&f, y).unwrap().value);
        }
        assert!(ks_statistic(&wedge, |s| laws.law_wedge.cdf(s)).unwrap() < 0.01);
        assert!(ks_statistic(&vee, |s| laws.law_vee.cdf(s)).unwrap() < 0.01);
        assert!(ks_statistic(&base, |s| laws.law_base_on_marginal.cdf(s)).unwrap() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn mean_identity_and_ordering(mu in -3.0..3.0f64, s2 in 0.1..6.0f64, mu0 in -3.0..3.0f64,
                                      s0 in 0.1..6.0f64, w2 in 0.0..6.0f64) {
            let f = g(mu, s2);
            let m = ModelA::new(g(mu0, s0), w2).unwrap();
            let laws = build_score_laws(&f, &m).unwrap();
            let tol = 1e-12 * (1.0 + laws.common_mean.abs());
            prop_assert!((laws.law_wedge.mean() - laws.common_mean).abs() <= tol);
            prop_assert!((laws.law_vee.mean() - laws.common_mean).abs() <= tol);
            prop_assert!(laws.law_wedge.variance() >= laws.law_vee.variance() * (1.0 - 1e-12));
            prop_assert!(variance_ratio(&f, &m).unwrap() >= 1.0 - 1e-12);
        }
    }
}
