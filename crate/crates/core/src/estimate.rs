//! Recursive and batch kernel estimators.
//!
//! [`RecursiveRegressor`] runs the stochastic approximation recursion
//!
//! ```text
//! r_n(x) = (1 - γ_n Z_n(x)) r_{n-1}(x) + γ_n W_n(x)
//! Z_n(x) = h_n⁻¹ K((x - X_n)/h_n),  W_n(x) = Y_n Z_n(x)
//! ```
//!
//! and the weighted average `r̄_n(x) = Σ q_k r_k(x) / Σ q_k` in a single pass,
//! at a fixed set of evaluation points. With `γ_n = 1/n` this is Révész's
//! estimator. Both `r_0` and `f̂_0` start at zero, which makes `r_n` linear in
//! the responses.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::seq::{EstimatorConfig, SequenceSpec};

#[derive(Debug, Clone)]
pub struct RecursiveRegressor {
    points: Vec<f64>,
    r: Vec<f64>,
    r_bar: Vec<f64>,
    weight_sum: f64,
    n: u64,
    cfg: EstimatorConfig,
    kernel: Kernel,
    weights_scratch: Vec<f64>,
}

impl RecursiveRegressor {
    /// Fails when `γ_n h_n⁻¹ ‖K‖∞ > 1` for some n, i.e. when an update could
    /// leave the contraction regime.
    pub fn new(points: Vec<f64>, cfg: EstimatorConfig, kernel: Kernel) -> Result<Self> {
        cfg.check_contraction(&kernel)?;
        let len = points.len();
        Ok(Self {
            points,
            r: vec![0.0; len],
            r_bar: vec![0.0; len],
            weight_sum: 0.0,
            n: 0,
            cfg,
            kernel,
            weights_scratch: vec![0.0; len],
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Current iterates r_n at each point.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Current averages r̄_n at each point.
    pub fn r_bar(&self) -> &[f64] {
        &self.r_bar
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }

    /// Feeds one observation `(x_obs, y_obs)` to every evaluation point.
    /// On error the state is left untouched.
    pub fn update(&mut self, x_obs: f64, y_obs: f64) -> Result<()> {
        if !(x_obs.is_finite() && y_obs.is_finite()) {
            return Err(Error::NonFiniteSample { x: x_obs, y: y_obs });
        }
        let n = self.n + 1;
        let gamma = self.cfg.stepsize.eval(n);
        let h = self.cfg.bandwidth.eval(n);
        for (z, &x) in self.weights_scratch.iter_mut().zip(&self.points) {
            *z = self.kernel.scaled(x, x_obs, h);
            let factor = gamma * *z;
            if factor > 1.0 {
                return Err(Error::ContractionViolation { n, x, factor });
            }
        }

        let q = self.cfg.weights.eval(n);
        self.weight_sum += q;
        let share = q / self.weight_sum;
        for ((r, r_bar), &z) in self
            .r
            .iter_mut()
            .zip(self.r_bar.iter_mut())
            .zip(&self.weights_scratch)
        {
            *r = (1.0 - gamma * z) * *r + gamma * y_obs * z;
            *r_bar += share * (*r - *r_bar);
        }
        self.n = n;
        Ok(())
    }

    pub fn update_all<'a>(&mut self, samples: impl IntoIterator<Item = &'a (f64, f64)>) -> Result<()> {
        samples
            .into_iter()
            .try_for_each(|&(x, y)| self.update(x, y))
    }
}

/// Recursive density estimator
/// `f̂_n(x) = (1 - β_n) f̂_{n-1}(x) + β_n h_n⁻¹ K((x - X_n)/h_n)`.
#[derive(Debug, Clone)]
pub struct RecursiveDensity {
    points: Vec<f64>,
    f_hat: Vec<f64>,
    n: u64,
    density_stepsize: SequenceSpec,
    bandwidth: SequenceSpec,
    kernel: Kernel,
}

impl RecursiveDensity {
    pub fn new(
        points: Vec<f64>,
        density_stepsize: SequenceSpec,
        bandwidth: SequenceSpec,
        kernel: Kernel,
    ) -> Self {
        let len = points.len();
        Self {
            points,
            f_hat: vec![0.0; len],
            n: 0,
            density_stepsize,
            bandwidth,
            kernel,
        }
    }

    pub fn from_config(points: Vec<f64>, cfg: &EstimatorConfig, kernel: Kernel) -> Self {
        Self::new(points, cfg.density_stepsize, cfg.bandwidth, kernel)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn f_hat(&self) -> &[f64] {
        &self.f_hat
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }

    pub fn update(&mut self, x_obs: f64) -> Result<()> {
        if !x_obs.is_finite() {
            return Err(Error::NonFiniteSample { x: x_obs, y: 0.0 });
        }
        let n = self.n + 1;
        let beta = self.density_stepsize.eval(n);
        if beta > 1.0 {
            return Err(Error::InvalidStepsize { n, value: beta });
        }
        let h = self.bandwidth.eval(n);
        for (f, &x) in self.f_hat.iter_mut().zip(&self.points) {
            *f = (1.0 - beta) * *f + beta * self.kernel.scaled(x, x_obs, h);
        }
        self.n = n;
        Ok(())
    }
}

/// Nadaraya–Watson estimate `Σ Y_k K((x-X_k)/h) / Σ K((x-X_k)/h)`.
pub fn nadaraya_watson(samples: &[(f64, f64)], x: f64, h: f64, kernel: &Kernel) -> Result<f64> {
    let (num, den) = samples.iter().fold((0.0, 0.0), |(num, den), &(xi, yi)| {
        let w = kernel.eval((x - xi) / h);
        (num + w * yi, den + w)
    });
    if den <= 0.0 {
        return Err(Error::DegenerateDenominator { x });
    }
    Ok(num / den)
}

/// Rosenblatt density estimate `(n h)⁻¹ Σ K((x - X_k)/h)`.
pub fn rosenblatt_density(xs: &[f64], x: f64, h: f64, kernel: &Kernel) -> f64 {
    let total: f64 = xs.iter().map(|&xi| kernel.eval((x - xi) / h)).sum();
    total / (xs.len() as f64 * h)
}

/// Replays the whole recursion over `history` and returns r̄_n at each of
/// `points`. Per-point arithmetic does not depend on the other points, so
/// each value is bit-identical to having tracked that point from the start.
pub fn replay_averaged(
    history: &[(f64, f64)],
    points: &[f64],
    cfg: &EstimatorConfig,
    kernel: &Kernel,
) -> Result<Vec<f64>> {
    let mut state = RecursiveRegressor::new(points.to_vec(), *cfg, *kernel)?;
    state.update_all(history)?;
    Ok(state.r_bar)
}

/// r̄_n(x) after replaying `history`; zero for an empty history.
pub fn evaluate_averaged_at(
    history: &[(f64, f64)],
    x: f64,
    cfg: &EstimatorConfig,
    kernel: &Kernel,
) -> Result<f64> {
    Ok(replay_averaged(history, &[x], cfg, kernel)?[0])
}
