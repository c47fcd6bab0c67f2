use core::f64::consts::{E, PI};

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::error::{domain, ensure_finite, Result};

/// ln(pi)
const LN_PI: f64 = 1.144_729_885_849_400_2;
/// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
/// 1 / sqrt(2 pi)
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Lanczos coefficients (Pugh 2004, n = 10, r = 10.900511).
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];
const LANCZOS_R: f64 = 10.900_511;

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

pub(crate) fn phi(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub(crate) fn big_phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z * core::f64::consts::FRAC_1_SQRT_2)
}

pub(crate) fn big_phi_bar(z: f64) -> f64 {
    0.5 * libm::erfc(z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> Result<f64> {
    ensure_finite(z, "z")?;
    Ok(phi(z))
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> Result<f64> {
    ensure_finite(z, "z")?;
    Ok(big_phi(z))
}

/// Standard normal survival function `1 - normal_cdf(z)`, accurate in the upper tail.
pub fn normal_sf(z: f64) -> Result<f64> {
    ensure_finite(z, "z")?;
    Ok(big_phi_bar(z))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (k, d)| s + d / (k as f64 - x));
        LN_PI
            - (PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / E).ln()
    } else {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (k, d)| s + d / (x + k as f64 - 1.0));
        s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / E).ln()
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn log_gamma(x: f64) -> Result<f64> {
    ensure_finite(x, "x")?;
    if x <= 0.0 {
        return Err(domain(alloc::format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(lgamma(x))
}

pub(crate) fn psi(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: -sum B_2k / (2k x^2k)
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - tail
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    ensure_finite(x, "x")?;
    if x <= 0.0 {
        return Err(domain(alloc::format!("digamma requires x > 0, got {x}")));
    }
    Ok(psi(x))
}

/// Lower series for P(a, x); valid and fast for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - lgamma(a)).exp()
}

/// Continued fraction for Q(a, x) (modified Lentz); valid for x >= a + 1.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - lgamma(a)).exp() * h
}

pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    }
}

pub(crate) fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn check_incomplete_args(a: f64, x: f64) -> Result<()> {
    ensure_finite(a, "alpha")?;
    if a <= 0.0 {
        return Err(domain(alloc::format!("incomplete gamma requires alpha > 0, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(alloc::format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    Ok(if x.is_infinite() { 1.0 } else { gamma_p(a, x) })
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    Ok(if x.is_infinite() { 0.0 } else { gamma_q(a, x) })
}

/// Unregularized upper incomplete gamma Γ(a, x) = ∫ₓ^∞ t^(a-1) e^(-t) dt.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let q = regularized_upper_gamma(a, x)?;
    Ok(q * lgamma(a).exp())
}

/// `ln B(p, q)`.
pub fn ln_beta(p: f64, q: f64) -> Result<f64> {
    ensure_finite(p, "p")?;
    ensure_finite(q, "q")?;
    if p <= 0.0 || q <= 0.0 {
        return Err(domain(alloc::format!("beta requires p, q > 0, got ({p}, {q})")));
    }
    Ok(lgamma(p) + lgamma(q) - lgamma(p + q))
}

/// Beta function B(p, q) = Γ(p)Γ(q)/Γ(p+q), evaluated in log space.
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    ln_beta(p, q).map(f64::exp)
}
