//! Closed-form asymptotic constants of the recursive estimators.
//!
//! Everything here is a pure function of the sequences, the kernel and a
//! [`ModelOracle`] describing the true regression function, design density
//! and conditional variance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::normal;
use crate::seq::{validate_assumptions, EstimatorConfig, Mode, SequenceSpec};

/// Densities below this are treated as zero.
pub const MIN_DENSITY: f64 = 1e-12;

/// Base step of the finite-difference second derivative.
pub const FD_STEP: f64 = 1e-4;

/// Quantile used by both confidence intervals.
pub const Z_95: f64 = 1.96;

/// Ground truth needed by the asymptotic constants.
pub trait ModelOracle {
    /// True regression function r(x) = E[Y | X = x].
    fn regression(&self, x: f64) -> f64;
    /// Design density f(x).
    fn density(&self, x: f64) -> f64;
    /// Var[Y | X = x].
    fn cond_var(&self, x: f64) -> f64;
}

/// Oracle assembled from closures, mostly for tests and one-off models.
pub struct FnOracle<R, F, V> {
    pub r: R,
    pub f: F,
    pub var: V,
}

impl<R, F, V> ModelOracle for FnOracle<R, F, V>
where
    R: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    fn regression(&self, x: f64) -> f64 {
        (self.r)(x)
    }
    fn density(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn cond_var(&self, x: f64) -> f64 {
        (self.var)(x)
    }
}

/// Central second difference at step [`FD_STEP`], Richardson-extrapolated
/// with the half step. Error is O(step⁴) plus rounding.
pub fn second_derivative(g: impl Fn(f64) -> f64, x: f64) -> f64 {
    let d = |h: f64| (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    let coarse = d(FD_STEP);
    let fine = d(0.5 * FD_STEP);
    (4.0 * fine - coarse) / 3.0
}

/// ξ = lim (nγ_n)⁻¹.
pub fn xi(stepsize: &SequenceSpec) -> Result<f64> {
    let p = stepsize.power();
    if p > 1.0 {
        return Err(Error::DivergentXi { power: p });
    }
    if p < 1.0 || stepsize.log_power() > 0.0 {
        return Ok(0.0);
    }
    if stepsize.log_power() == 0.0 {
        return Ok(1.0 / stepsize.scale());
    }
    // n γ_n = c (ln n)^b → 0 for b < 0
    Err(Error::DivergentXi { power: p })
}

fn density_at(oracle: &dyn ModelOracle, x: f64) -> Result<f64> {
    let f = oracle.density(x);
    if !(f >= MIN_DENSITY) {
        return Err(Error::ZeroDensity { x, value: f });
    }
    Ok(f)
}

/// Bias constant m⁽²⁾(x) = [(rf)''(x) - r(x) f''(x)] / (2 f(x)) · ∫z²K.
pub fn m2(oracle: &dyn ModelOracle, x: f64, kernel: &Kernel) -> Result<f64> {
    let f = density_at(oracle, x)?;
    let rf_dd = second_derivative(|t| oracle.regression(t) * oracle.density(t), x);
    let f_dd = second_derivative(|t| oracle.density(t), x);
    Ok((rf_dd - oracle.regression(x) * f_dd) / (2.0 * f) * kernel.second_moment())
}

/// Normalizing sequence under which the limit holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    /// √(γ_n⁻¹ h_n) · (r_n(x) - r(x)).
    SqrtInverseStepsizeBandwidth,
    /// √(n h_n) · (r̄_n(x) - r(x)).
    SqrtSampleBandwidth,
    /// h_n⁻² · (estimate - r(x)), convergence in probability.
    InverseBandwidthSquared,
}

/// Limiting normal law N(bias, variance) under `rate`. The bias-dominant
/// regime reports the deterministic limit as `bias` with zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltParams {
    pub bias: f64,
    pub variance: f64,
    pub rate: Rate,
}

/// Bandwidth regime of the limit theorems.
///
/// The constant `c` is the limit of γ_n⁻¹h_n⁵ for the generalized
/// estimator and of n h_n⁵ for the averaged one; the two are different
/// normalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Balanced { c: f64 },
    BiasDominant,
}

/// Checks the stepsize condition of the generalized estimator's limit
/// theorem: lim nγ_n > (1-a)/(2f(x)) when balanced, lim nγ_n > 2a/f(x)
/// when bias-dominant. With ξ = 0 both hold trivially.
pub fn check_generalized_condition(density: f64, a: f64, xi: f64, regime: Regime) -> Result<()> {
    let (holds, threshold) = match regime {
        Regime::Balanced { .. } => (2.0 * density > (1.0 - a) * xi, (1.0 - a) / (2.0 * density)),
        Regime::BiasDominant => (density > 2.0 * a * xi, 2.0 * a / density),
    };
    if holds {
        Ok(())
    } else {
        Err(Error::ConditionViolated(format!(
            "lim n*gamma_n = {} must exceed {threshold}",
            1.0 / xi
        )))
    }
}

/// Limit law of the generalized estimator from its ingredients.
pub fn generalized_limit(
    density: f64,
    m2: f64,
    cond_var: f64,
    square_integral: f64,
    a: f64,
    xi: f64,
    regime: Regime,
) -> Result<CltParams> {
    check_generalized_condition(density, a, xi, regime)?;
    let shape = density * m2 / (density - 2.0 * a * xi);
    Ok(match regime {
        Regime::Balanced { c } => CltParams {
            bias: c.sqrt() * shape,
            variance: cond_var * density * square_integral / (2.0 * density - (1.0 - a) * xi),
            rate: Rate::SqrtInverseStepsizeBandwidth,
        },
        Regime::BiasDominant => CltParams {
            bias: shape,
            variance: 0.0,
            rate: Rate::InverseBandwidthSquared,
        },
    })
}

/// Limit law of r_n(x) for the generalized (non-averaged) estimator.
pub fn clt_params_generalized(
    oracle: &dyn ModelOracle,
    x: f64,
    cfg: &EstimatorConfig,
    kernel: &Kernel,
    regime: Regime,
) -> Result<CltParams> {
    let report = validate_assumptions(cfg, Mode::Generalized);
    if !report.passed() {
        return Err(Error::ConditionViolated(report.to_string()));
    }
    let xi = xi(&cfg.stepsize)?;
    let f = density_at(oracle, x)?;
    let m2 = m2(oracle, x, kernel)?;
    generalized_limit(
        f,
        m2,
        oracle.cond_var(x),
        kernel.square_integral(),
        cfg.a(),
        xi,
        regime,
    )
}

/// Limit law of the averaged estimator from its ingredients.
pub fn averaged_limit(
    density: f64,
    m2: f64,
    cond_var: f64,
    square_integral: f64,
    a: f64,
    q: f64,
    regime: Regime,
) -> Result<CltParams> {
    let bias_den = 1.0 - q - 2.0 * a;
    if bias_den <= 0.0 {
        return Err(Error::ConditionViolated(format!(
            "1 - q - 2a = {bias_den} must be positive"
        )));
    }
    let shape = (1.0 - q) / bias_den * m2;
    Ok(match regime {
        Regime::Balanced { c } => CltParams {
            bias: c.sqrt() * shape,
            variance: variance_factor(q, a)? * cond_var / density * square_integral,
            rate: Rate::SqrtSampleBandwidth,
        },
        Regime::BiasDominant => CltParams {
            bias: shape,
            variance: 0.0,
            rate: Rate::InverseBandwidthSquared,
        },
    })
}

/// Limit law of r̄_n(x) for the averaged estimator.
pub fn clt_params_averaged(
    oracle: &dyn ModelOracle,
    x: f64,
    cfg: &EstimatorConfig,
    kernel: &Kernel,
    regime: Regime,
) -> Result<CltParams> {
    let report = validate_assumptions(cfg, Mode::Averaged);
    if !report.passed() {
        return Err(Error::ConditionViolated(report.to_string()));
    }
    let f = density_at(oracle, x)?;
    let m2 = m2(oracle, x, kernel)?;
    averaged_limit(
        f,
        m2,
        oracle.cond_var(x),
        kernel.square_integral(),
        cfg.a(),
        cfg.q(),
        regime,
    )
}

/// Asymptotic variance Var[Y|X=x] / f(x) · ∫K² of √(nh_n)(r̃_n(x) - r(x))
/// for Nadaraya–Watson under undersmoothing.
pub fn nadaraya_watson_variance(oracle: &dyn ModelOracle, x: f64, kernel: &Kernel) -> Result<f64> {
    let f = density_at(oracle, x)?;
    Ok(oracle.cond_var(x) / f * kernel.square_integral())
}

/// Weight exponent minimizing the averaged estimator's variance.
pub fn optimal_q(a: f64) -> f64 {
    a
}

/// (1-q)² / (1+a-2q).
pub fn variance_factor(q: f64, a: f64) -> Result<f64> {
    let den = 1.0 + a - 2.0 * q;
    if den <= 0.0 {
        return Err(Error::PoleAtDenominator(den));
    }
    Ok((1.0 - q).powi(2) / den)
}

/// Asymptotic coverage 2Φ(z·√(width_variance / true_variance)) - 1 of an
/// interval `estimate ± z·√(width_variance/nh)` when the estimator's actual
/// limiting variance is `true_variance`.
pub fn theoretical_level(width_variance: f64, true_variance: f64, z: f64) -> f64 {
    2.0 * normal::cdf(z * (width_variance / true_variance).sqrt()) - 1.0
}
