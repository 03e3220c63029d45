//! Confidence intervals for r(x).
//!
//! Both intervals have the form
//!
//! ```text
//! center ± 1.96 · sqrt( Σᵢ (Yᵢ - center_fn(Xᵢ))² · ∫K² / (n² h_n f_n(x)) )
//! ```
//!
//! For Nadaraya–Watson, `center_fn` is r̃_n and `f_n` the Rosenblatt
//! estimate, all with the terminal bandwidth. For the averaged estimator,
//! `center_fn` is the terminal r̄_n replayed at every Xᵢ and `f_n` the
//! recursive density estimate; the recursion uses the per-step bandwidths
//! while the width uses the terminal h_n.

use serde::{Deserialize, Serialize};

use crate::asymp::{MIN_DENSITY, Z_95};
use crate::error::{Error, Result};
use crate::estimate::{replay_averaged, RecursiveDensity, RecursiveRegressor};
use crate::kernel::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }
}

/// `z · sqrt(rss · ∫K² / (n² h f))`.
pub fn half_width(rss: f64, square_integral: f64, n: usize, h: f64, density: f64) -> f64 {
    let n = n as f64;
    Z_95 * (rss * square_integral / (n * n * h * density)).sqrt()
}

/// How the averaged estimator is evaluated at the observed Xᵢ when forming
/// residuals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Replay the recursion at every Xᵢ; O(n²).
    #[default]
    Exact,
    /// Replay on a uniform grid spanning the Xᵢ and interpolate linearly.
    /// Approximate; intended for n beyond a few thousand.
    Grid { size: usize },
}

/// Nadaraya–Watson interval at one point. See [`nw_intervals`].
pub fn nw_interval(samples: &[(f64, f64)], x: f64, h: f64, kernel: &Kernel) -> Result<Interval> {
    nw_intervals(samples, &[x], h, kernel).pop().expect("one point")
}

/// Nadaraya–Watson intervals at several points sharing one residual sum.
pub fn nw_intervals(
    samples: &[(f64, f64)],
    points: &[f64],
    h: f64,
    kernel: &Kernel,
) -> Vec<Result<Interval>> {
    let rss = nw_residual_sum(samples, h, kernel);
    points
        .iter()
        .map(|&x| {
            let rss = rss.clone()?;
            let (num, den) = samples.iter().fold((0.0, 0.0), |(num, den), &(xi, yi)| {
                let w = kernel.eval((x - xi) / h);
                (num + w * yi, den + w)
            });
            let density = den / (samples.len() as f64 * h);
            if den <= 0.0 || density <= 0.0 {
                return Err(Error::DegenerateDenominator { x });
            }
            Ok(Interval {
                center: num / den,
                half_width: half_width(rss, kernel.square_integral(), samples.len(), h, density),
            })
        })
        .collect()
}

/// Σᵢ (Yᵢ - r̃_n(Xᵢ))², using the symmetry of the kernel matrix.
fn nw_residual_sum(samples: &[(f64, f64)], h: f64, kernel: &Kernel) -> Result<f64> {
    let n = samples.len();
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    let k0 = kernel.eval(0.0);
    for i in 0..n {
        let (xi, yi) = samples[i];
        num[i] += k0 * yi;
        den[i] += k0;
        for j in (i + 1)..n {
            let (xj, yj) = samples[j];
            let w = kernel.eval((xi - xj) / h);
            num[i] += w * yj;
            den[i] += w;
            num[j] += w * yi;
            den[j] += w;
        }
    }
    let mut rss = 0.0;
    for (i, &(xi, yi)) in samples.iter().enumerate() {
        if den[i] <= 0.0 {
            return Err(Error::DegenerateDenominator { x: xi });
        }
        rss += (yi - num[i] / den[i]).powi(2);
    }
    Ok(rss)
}

/// Σᵢ (Yᵢ - r̄_n(Xᵢ))² with r̄_n the estimator after the full history.
pub fn averaged_residual_sum(
    history: &[(f64, f64)],
    state: &RecursiveRegressor,
    mode: ResidualMode,
) -> Result<f64> {
    let xs: Vec<f64> = history.iter().map(|&(x, _)| x).collect();
    let fitted = match mode {
        ResidualMode::Exact => replay_averaged(history, &xs, state.config(), state.kernel())?,
        ResidualMode::Grid { size } => {
            let size = size.max(2);
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let step = if hi > lo { (hi - lo) / (size - 1) as f64 } else { 1.0 };
            let grid: Vec<f64> = (0..size).map(|i| lo + i as f64 * step).collect();
            let on_grid = replay_averaged(history, &grid, state.config(), state.kernel())?;
            xs.iter()
                .map(|&x| {
                    let t = (x - lo) / step;
                    let i = (t.floor() as usize).min(size - 2);
                    let frac = t - i as f64;
                    on_grid[i] + frac * (on_grid[i + 1] - on_grid[i])
                })
                .collect()
        }
    };
    Ok(history
        .iter()
        .zip(&fitted)
        .map(|(&(_, y), &fit)| (y - fit).powi(2))
        .sum())
}

fn check_history(history: &[(f64, f64)], state: &RecursiveRegressor, density: &RecursiveDensity) -> Result<()> {
    for n in [state.n(), density.n()] {
        if n != history.len() as u64 {
            return Err(Error::HistoryMismatch {
                history: history.len(),
                state: n,
            });
        }
    }
    Ok(())
}

fn averaged_from_parts(
    x: f64,
    center: f64,
    density: f64,
    rss: f64,
    n: usize,
    state: &RecursiveRegressor,
) -> Result<Interval> {
    if !(density > MIN_DENSITY) {
        return Err(Error::DegenerateDenominator { x });
    }
    let h = state.config().bandwidth.eval(n as u64);
    Ok(Interval {
        center,
        half_width: half_width(rss, state.kernel().square_integral(), n, h, density),
    })
}

/// Interval around r̄_n(x). `state` and `density` must both have consumed
/// exactly `history` and must track `x`.
pub fn averaged_interval(
    history: &[(f64, f64)],
    x: f64,
    state: &RecursiveRegressor,
    density: &RecursiveDensity,
    mode: ResidualMode,
) -> Result<Interval> {
    check_history(history, state, density)?;
    let i = state.index_of(x).ok_or(Error::UnknownPoint(x))?;
    let j = density.index_of(x).ok_or(Error::UnknownPoint(x))?;
    let rss = averaged_residual_sum(history, state, mode)?;
    averaged_from_parts(x, state.r_bar()[i], density.f_hat()[j], rss, history.len(), state)
}

/// Intervals at every point tracked by `state`, sharing one residual pass.
/// `density` must track the same points in the same order.
pub fn averaged_intervals(
    history: &[(f64, f64)],
    state: &RecursiveRegressor,
    density: &RecursiveDensity,
    mode: ResidualMode,
) -> Result<Vec<Result<Interval>>> {
    check_history(history, state, density)?;
    if state.points() != density.points() {
        return Err(Error::InvalidConfig(
            "regression and density states track different points".to_string(),
        ));
    }
    let rss = averaged_residual_sum(history, state, mode)?;
    Ok(state
        .points()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            averaged_from_parts(x, state.r_bar()[i], density.f_hat()[i], rss, history.len(), state)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::nadaraya_watson;
    use crate::seq::{EstimatorConfig, SequenceSpec};
    use crate::testing::{unrolled_iterates, weighted_average};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cos_history(n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(StandardNormal);
                (x, x.cos() + e)
            })
            .collect()
    }

    fn fitted_states(history: &[(f64, f64)], points: Vec<f64>) -> (RecursiveRegressor, RecursiveDensity) {
        let cfg = EstimatorConfig::undersmoothing();
        let k = Kernel::gaussian();
        let mut st = RecursiveRegressor::new(points.clone(), cfg, k).unwrap();
        let mut d = RecursiveDensity::from_config(points, &cfg, k);
        for &(x, y) in history {
            st.update(x, y).unwrap();
            d.update(x).unwrap();
        }
        (st, d)
    }

    #[test]
    fn constant_responses_give_a_point_interval() {
        let samples: Vec<_> = cos_history(40, 1).into_iter().map(|(x, _)| (x, 2.5)).collect();
        let iv = nw_interval(&samples, 0.1, 0.4, &Kernel::gaussian()).unwrap();
        assert!((iv.center - 2.5).abs() < 1e-14);
        assert!(iv.half_width < 1e-6);
        assert!(iv.lower() <= iv.upper());
    }

    #[test]
    fn two_point_nadaraya_watson_interval() {
        let k = Kernel::gaussian();
        let samples = [(0.0, 1.0), (1.0, 3.0)];
        let iv = nw_interval(&samples, 0.0, 1.0, &k).unwrap();
        // hand arithmetic: r̃(0) = r̃(1) mirrored, S = (1 - r̃(0))² + (3 - r̃(1))²
        let (k0, k1) = (k.eval(0.0), k.eval(1.0));
        let r0 = (k0 + 3.0 * k1) / (k0 + k1);
        let r1 = (k1 + 3.0 * k0) / (k0 + k1);
        let s = (1.0 - r0).powi(2) + (3.0 - r1).powi(2);
        let f = 0.5 * (k0 + k1);
        assert!((f - 0.320_456_502_4).abs() < 1e-9);
        let expect = 1.96 * (s * 0.282_094_791_773_878_1 / (4.0 * f)).sqrt();
        assert!((iv.center - 1.755_081_337_596_291).abs() < 1e-12);
        assert!((iv.half_width - expect).abs() < 1e-12);
    }

    #[test]
    fn residual_sum_matches_direct_loop() {
        let k = Kernel::gaussian();
        let samples = cos_history(60, 4);
        let h = 0.35;
        let direct: f64 = samples
            .iter()
            .map(|&(x, y)| (y - nadaraya_watson(&samples, x, h, &k).unwrap()).powi(2))
            .sum();
        let fast = nw_residual_sum(&samples, h, &k).unwrap();
        assert!((fast - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn half_width_homogeneity() {
        let base = half_width(3.0, 0.28, 50, 0.3, 0.4);
        assert!((half_width(3.0, 0.56, 50, 0.3, 0.4) - std::f64::consts::SQRT_2 * base).abs() < 1e-14);
        assert_eq!(half_width(3.0, 0.0, 50, 0.3, 0.4), 0.0);
    }

    #[test]
    fn degenerate_compact_support() {
        let samples = [(0.0, 1.0), (0.1, 2.0)];
        let out = nw_interval(&samples, 5.0, 0.5, &Kernel::epanechnikov());
        assert!(matches!(out, Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn single_step_averaged_interval() {
        let history = [(0.3, 1.7)];
        let (st, d) = fitted_states(&history, vec![0.0]);
        let iv = averaged_interval(&history, 0.0, &st, &d, ResidualMode::Exact).unwrap();
        // n = 1: γ₁ = h₁ = q₁ = 1, β₁ = 0.8
        let k = Kernel::gaussian();
        let r1_at_0 = 1.7 * k.eval(0.3);
        let r1_at_x1 = 1.7 * k.eval(0.0);
        let f1 = 0.8 * k.eval(0.3);
        let expect_hw = 1.96 * ((1.7 - r1_at_x1).powi(2) * k.square_integral() / f1).sqrt();
        assert!((iv.center - r1_at_0).abs() < 1e-15);
        assert!((iv.half_width - expect_hw).abs() < 1e-14);
    }

    #[test]
    fn averaged_interval_matches_stored_history_reference() {
        let cfg = EstimatorConfig::undersmoothing();
        let k = Kernel::gaussian();
        let history = cos_history(200, 21);
        let x = 0.5;
        let (st, d) = fitted_states(&history, vec![x]);
        let iv = averaged_interval(&history, x, &st, &d, ResidualMode::Exact).unwrap();

        let gamma = |n| cfg.stepsize.eval(n);
        let h = |n| cfg.bandwidth.eval(n);
        let q = |n| cfg.weights.eval(n);
        let avg_at = |p: f64| weighted_average(&unrolled_iterates(&history, p, gamma, h, |z| k.eval(z), 0.0), q);
        let center = avg_at(x);
        let rss: f64 = history.iter().map(|&(xi, yi)| (yi - avg_at(xi)).powi(2)).sum();
        let mut f_hat = 0.0;
        for (i, &(xi, _)) in history.iter().enumerate() {
            let n = i as u64 + 1;
            let beta = cfg.density_stepsize.eval(n);
            f_hat = (1.0 - beta) * f_hat + beta * k.eval((x - xi) / h(n)) / h(n);
        }
        let hw = 1.96 * (rss * k.square_integral() / (200.0f64.powi(2) * h(200) * f_hat)).sqrt();
        assert!((iv.lower() - (center - hw)).abs() < 1e-10);
        assert!((iv.upper() - (center + hw)).abs() < 1e-10);
    }

    #[test]
    fn grid_residuals_approximate_exact() {
        let history = cos_history(400, 9);
        let (st, _) = fitted_states(&history, vec![0.0]);
        let exact = averaged_residual_sum(&history, &st, ResidualMode::Exact).unwrap();
        let grid = averaged_residual_sum(&history, &st, ResidualMode::Grid { size: 400 }).unwrap();
        assert!((grid - exact).abs() < 1e-3 * exact, "{grid} vs {exact}");
    }

    #[test]
    fn mismatched_history_is_rejected() {
        let history = cos_history(10, 2);
        let (st, d) = fitted_states(&history, vec![0.0]);
        let err = averaged_interval(&history[..9], 0.0, &st, &d, ResidualMode::Exact);
        assert!(matches!(err, Err(Error::HistoryMismatch { .. })));
        let err = averaged_interval(&history, 0.7, &st, &d, ResidualMode::Exact);
        assert!(matches!(err, Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn nadaraya_watson_interval_is_translation_equivariant() {
        let k = Kernel::gaussian();
        let samples = cos_history(80, 3);
        let shifted: Vec<_> = samples.iter().map(|&(x, y)| (x, y + 7.5)).collect();
        let a = nw_interval(&samples, -0.5, 0.4, &k).unwrap();
        let b = nw_interval(&shifted, -0.5, 0.4, &k).unwrap();
        assert!((b.center - a.center - 7.5).abs() < 1e-12);
        assert!((b.half_width - a.half_width).abs() < 1e-9);
    }

    #[test]
    fn averaged_center_shift_is_linear() {
        let history = cos_history(80, 6);
        let shift = -2.0;
        let shifted: Vec<_> = history.iter().map(|&(x, y)| (x, y + shift)).collect();
        let ones: Vec<_> = history.iter().map(|&(x, _)| (x, 1.0)).collect();
        let (a, _) = fitted_states(&history, vec![0.0]);
        let (b, _) = fitted_states(&shifted, vec![0.0]);
        let (c, _) = fitted_states(&ones, vec![0.0]);
        assert!((b.r_bar()[0] - a.r_bar()[0] - shift * c.r_bar()[0]).abs() < 1e-12);
    }

    #[test]
    fn widths_are_of_the_same_order() {
        let cfg = EstimatorConfig::undersmoothing();
        let k = Kernel::gaussian();
        let mut ratios: Vec<f64> = (0..200)
            .map(|seed| {
                let history = cos_history(200, 500 + seed);
                let (st, d) = fitted_states(&history, vec![0.0]);
                let avg = averaged_interval(&history, 0.0, &st, &d, ResidualMode::Exact).unwrap();
                let nw = nw_interval(&history, 0.0, cfg.bandwidth.eval(200), &k).unwrap();
                avg.half_width / nw.half_width
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let median = 0.5 * (ratios[99] + ratios[100]);
        assert!((0.5..=2.0).contains(&median), "median ratio {median}");
    }

    #[test]
    fn constant_weights_example_uses_terminal_bandwidth() {
        // With constant sequences the terminal and per-step bandwidths agree,
        // so the averaged width reduces to the same formula as the batch one.
        let one = SequenceSpec::constant(1.0).unwrap();
        let cfg = EstimatorConfig::new(one, SequenceSpec::constant(2.0).unwrap(), one, one).unwrap();
        let history = [(0.0, 1.0), (0.5, -1.0)];
        let k = Kernel::gaussian();
        let mut st = RecursiveRegressor::new(vec![0.2], cfg, k).unwrap();
        let mut d = RecursiveDensity::from_config(vec![0.2], &cfg, k);
        for &(x, y) in &history {
            st.update(x, y).unwrap();
            d.update(x).unwrap();
        }
        let iv = averaged_interval(&history, 0.2, &st, &d, ResidualMode::Exact).unwrap();
        let rss = averaged_residual_sum(&history, &st, ResidualMode::Exact).unwrap();
        let expect = half_width(rss, k.square_integral(), 2, 2.0, d.f_hat()[0]);
        assert_eq!(iv.half_width, expect);
    }
}
