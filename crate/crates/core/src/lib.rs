//! Recursive kernel regression by stochastic approximation.
//!
//! The crate implements Révész's recursive regression estimator with a
//! general stepsize, its weighted (Polyak–Ruppert style) average, the
//! recursive density estimator used to studentize it, and the batch
//! Nadaraya–Watson/Rosenblatt baselines. Around those estimators sit the
//! closed-form asymptotic constants ([`asymp`]), the two confidence-interval
//! constructions ([`infer`]) and a reproducible Monte Carlo harness
//! ([`simlab`]) that measures interval coverage.
//!
//! Module map:
//!
//! - [`seq`]: regularly varying sequences `c·n^(-p)·(ln n)^b` and the
//!   assumption checks on stepsize/bandwidth/weight exponents.
//! - [`kernel`]: Gaussian and Epanechnikov kernels with analytic moments.
//! - [`estimate`]: the recursive and batch estimators.
//! - [`asymp`]: ξ, the bias constant m⁽²⁾, CLT parameters, optimal weights.
//! - [`infer`]: confidence intervals around Nadaraya–Watson and the
//!   averaged estimator.
//! - [`simlab`]: regression models, design densities and coverage runs.

pub mod asymp;
pub mod error;
pub mod estimate;
pub mod infer;
pub mod kernel;
pub mod normal;
pub mod seq;
pub mod simlab;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelFamily};
pub use seq::{EstimatorConfig, Mode, SequenceSpec, ValidationReport};
