use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::error::{config, domain, Error, Result};

/// Controls for the semi-infinite integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
    /// Nodes of the fixed Gauss-Legendre rule used by [`integrate_semi_infinite_fixed`].
    pub node_count: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            max_subdivisions: 2048,
            node_count: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(relative_tolerance: f64) -> Self {
        Self {
            relative_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0) || !self.relative_tolerance.is_finite() {
            return Err(config("relative_tolerance must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(config("max_subdivisions must be at least 1"));
        }
        if self.node_count < 2 {
            return Err(config("node_count must be at least 2"));
        }
        Ok(())
    }
}

/// Result of a quadrature: value plus absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_kron = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        abs_kron += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kron.is_finite() {
        return Err(domain("integrand produced a non-finite value"));
    }
    Ok(Segment {
        lo,
        hi,
        value: kron * half,
        abs_value: abs_kron * half.abs(),
        error: ((kron - gauss) * half).abs(),
    })
}

/// Adaptive Gauss-Kronrod integral of `integrand` over (0, ∞).
///
/// Uses the change of variable `x = t / (1 - t)`; see
/// [`integrate_semi_infinite_scaled`] to place the bulk of the mass near `t = 1/2`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(integrand: F, spec: &QuadratureSpec) -> Result<Quadrature> {
    integrate_semi_infinite_scaled(integrand, 1.0, spec)
}

/// As [`integrate_semi_infinite`] with the substitution `x = scale · t / (1 - t)`.
///
/// Stops once the summed error estimate is below
/// `relative_tolerance · |value|` (or below the round-off floor of the
/// absolute integral). Running out of subdivisions yields
/// [`Error::Convergence`] carrying the best estimate.
pub fn integrate_semi_infinite_scaled<F: FnMut(f64) -> f64>(
    mut integrand: F,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(domain("quadrature scale must be positive and finite"));
    }
    let mut mapped = |t: f64| {
        let u = 1.0 - t;
        let x = scale * t / u;
        let fx = integrand(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * scale / (u * u)
        }
    };

    let first = kronrod(&mut mapped, 0.0, 1.0)?;
    let mut value = first.value;
    let mut abs_value = first.abs_value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        let floor = 50.0 * f64::EPSILON * abs_value;
        if error <= (spec.relative_tolerance * value.abs()).max(floor) {
            return Ok(Quadrature {
                value,
                error_estimate: error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence {
                best: value,
                error_estimate: error,
                iterations: subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod(&mut mapped, worst.lo, mid)?;
        let right = kronrod(&mut mapped, mid, worst.hi)?;
        value += left.value + right.value - worst.value;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // Re-sum occasionally so the running totals do not drift.
        if subdivisions % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            abs_value = heap.iter().map(|s| s.abs_value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed `node_count`-point Gauss-Legendre rule on the mapped interval.
///
/// A non-adaptive cross-check for [`integrate_semi_infinite`]; no error
/// estimate is produced.
pub fn integrate_semi_infinite_fixed<F: FnMut(f64) -> f64>(mut integrand: F, scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let (nodes, weights) = gauss_legendre(spec.node_count);
    let mut sum = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let t = 0.5 * (t + 1.0);
        let u = 1.0 - t;
        let fx = integrand(scale * t / u);
        if fx != 0.0 {
            sum += 0.5 * w * fx * scale / (u * u);
        }
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(domain("integrand produced a non-finite value"))
    }
}
