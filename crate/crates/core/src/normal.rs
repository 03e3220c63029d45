//! Standard normal distribution function.

use std::f64::consts::FRAC_1_SQRT_2;

/// Φ(x), through the complementary error function so both tails keep
/// full relative precision.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
