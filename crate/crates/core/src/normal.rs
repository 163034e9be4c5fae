//! Standard normal density and distribution functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, via `erfc` so both tails keep relative accuracy.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)`.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Density of `N(mean, var)` at `x`.
pub fn pdf_scaled(x: f64, mean: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    pdf((x - mean) / sd) / sd
}

/// Bivariate normal density of `N(0, Σ)` at `(x1, x2)`.
pub fn bivariate_pdf(x1: f64, x2: f64, s11: f64, s12: f64, s22: f64) -> f64 {
    let det = s11 * s22 - s12 * s12;
    let q = (s22 * x1 * x1 - 2.0 * s12 * x1 * x2 + s11 * x2 * x2) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}
