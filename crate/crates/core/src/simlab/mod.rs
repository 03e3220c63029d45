//! Monte Carlo coverage experiments.
//!
//! A cell fixes a model, design, noise scale d, sample size n and a set of
//! evaluation points. Each replication draws n observations, feeds them in
//! arrival order to the recursive regression and density estimators, and
//! scores both intervals (Nadaraya–Watson and averaged) on the same sample.
//!
//! Replication `i` of a cell draws from its own stream: ChaCha8 seeded
//! through `seed_from_u64(seed)` with the stream number set to `i`. Results
//! therefore do not depend on scheduling, and outcomes are reduced in
//! replication order so reports are bit-identical for any thread count.

mod model;
mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use model::{DesignDensity, RegressionModel, SimModel};
pub use report::{CoverageCell, CoverageReport, CSV_HEADER};

use crate::asymp::{self, theoretical_level, Regime, Z_95};
use crate::error::{Error, Result};
use crate::estimate::{nadaraya_watson, RecursiveDensity, RecursiveRegressor};
use crate::infer::{averaged_intervals, nw_intervals, Interval, ResidualMode};
use crate::kernel::{Kernel, KernelFamily};
use crate::normal;
use crate::seq::{validate_assumptions, EstimatorConfig, Mode};

/// Sample sizes of a coverage table.
pub const TABLE_NS: [usize; 3] = [50, 100, 200];
/// Noise scales of a coverage table.
pub const TABLE_DS: [f64; 2] = [1.0, 2.0];
/// Default evaluation points.
pub const TABLE_POINTS: [f64; 3] = [-0.5, 0.0, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Nadaraya–Watson with the interval around r̃_n.
    Nw,
    /// Averaged recursive estimator with the interval around r̄_n.
    Averaged,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Nw => "nw",
            Estimator::Averaged => "averaged",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSelection {
    Nw,
    Averaged,
    #[default]
    Both,
}

impl EstimatorSelection {
    pub fn includes(&self, e: Estimator) -> bool {
        matches!(
            (self, e),
            (EstimatorSelection::Both, _)
                | (EstimatorSelection::Nw, Estimator::Nw)
                | (EstimatorSelection::Averaged, Estimator::Averaged)
        )
    }
}

impl std::str::FromStr for EstimatorSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nw" => Ok(EstimatorSelection::Nw),
            "averaged" => Ok(EstimatorSelection::Averaged),
            "both" => Ok(EstimatorSelection::Both),
            other => Err(format!("unknown estimator {other:?} (expected nw, averaged or both)")),
        }
    }
}

/// One Monte Carlo cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: RegressionModel,
    pub design: DesignDensity,
    /// Noise scale d.
    pub d: f64,
    pub n: usize,
    pub reps: usize,
    pub points: Vec<f64>,
    pub estimator_cfg: EstimatorConfig,
    pub kernel: KernelFamily,
    pub seed: u64,
    #[serde(default)]
    pub estimators: EstimatorSelection,
    #[serde(default)]
    pub residual_mode: ResidualMode,
}

impl SimConfig {
    /// A cell with the undersmoothing configuration and Gaussian kernel.
    pub fn new(model: RegressionModel, design: DesignDensity, d: f64, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            model,
            design,
            d,
            n,
            reps,
            points: TABLE_POINTS.to_vec(),
            estimator_cfg: EstimatorConfig::undersmoothing(),
            kernel: KernelFamily::Gaussian,
            seed,
            estimators: EstimatorSelection::Both,
            residual_mode: ResidualMode::Exact,
        }
    }

    pub fn sim_model(&self) -> SimModel {
        SimModel {
            model: self.model,
            design: self.design,
            noise: self.d,
        }
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::from_family(self.kernel)
    }

    /// Structural checks plus the averaged-estimator assumptions.
    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise scale d = {} must be finite and >= 0", self.d)));
        }
        if self.points.is_empty() || self.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("evaluation points must be finite and nonempty".into()));
        }
        validate_assumptions(&self.estimator_cfg, Mode::Averaged).into_result()?;
        self.estimator_cfg.check_contraction(&self.kernel())?;
        self.estimator_cfg.check_density_stepsize()
    }
}

/// Stream for replication `rep` of a cell seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draws one observation from the cell's model.
pub fn sample(config: &SimConfig, rng: &mut ChaCha8Rng) -> (f64, f64) {
    config.sim_model().sample(rng)
}

fn draw(config: &SimConfig, rep: u64) -> Vec<(f64, f64)> {
    let mut rng = replication_rng(config.seed, rep);
    let m = config.sim_model();
    (0..config.n).map(|_| m.sample(&mut rng)).collect()
}

/// Per-point outcome of one replication: `None` when the interval was
/// degenerate, which scores as non-covering.
type Outcome = Vec<Option<Interval>>;

fn replicate(config: &SimConfig, rep: u64) -> Result<(Option<Outcome>, Option<Outcome>)> {
    let history = draw(config, rep);
    let kernel = config.kernel();
    let cfg = &config.estimator_cfg;

    let nw = config.estimators.includes(Estimator::Nw).then(|| {
        let h = cfg.bandwidth.eval(config.n as u64);
        nw_intervals(&history, &config.points, h, &kernel)
            .into_iter()
            .map(Result::ok)
            .collect()
    });

    let averaged = if config.estimators.includes(Estimator::Averaged) {
        let mut state = RecursiveRegressor::new(config.points.clone(), *cfg, kernel)?;
        let mut density = RecursiveDensity::from_config(config.points.clone(), cfg, kernel);
        for &(x, y) in &history {
            state.update(x, y)?;
            density.update(x)?;
        }
        let intervals = match averaged_intervals(&history, &state, &density, config.residual_mode) {
            Ok(v) => v.into_iter().map(Result::ok).collect(),
            Err(Error::DegenerateDenominator { .. }) => vec![None; config.points.len()],
            Err(e) => return Err(e),
        };
        Some(intervals)
    } else {
        None
    };
    Ok((nw, averaged))
}

/// Runs every replication of one cell. Replications run on the ambient
/// rayon pool.
pub fn run_cell(config: &SimConfig) -> Result<CoverageReport> {
    config.validate()?;
    let outcomes: Vec<_> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| replicate(config, rep))
        .collect::<Result<_>>()?;

    let truth: Vec<f64> = config.points.iter().map(|&x| config.model.eval(x)).collect();
    let cfg = &config.estimator_cfg;
    let averaged_level = theoretical_level(1.0, asymp::variance_factor(cfg.q(), cfg.a())?, Z_95);

    let mut cells = Vec::new();
    for (i, &x) in config.points.iter().enumerate() {
        for est in [Estimator::Nw, Estimator::Averaged] {
            if !config.estimators.includes(est) {
                continue;
            }
            let mut covered = 0usize;
            let mut degenerate = 0usize;
            let mut width_sum = 0.0;
            for (nw, avg) in &outcomes {
                let per_point = match est {
                    Estimator::Nw => nw,
                    Estimator::Averaged => avg,
                };
                match per_point.as_ref().expect("selected estimator ran")[i] {
                    Some(iv) => {
                        covered += usize::from(iv.contains(truth[i]));
                        width_sum += iv.width();
                    }
                    None => degenerate += 1,
                }
            }
            let reps = config.reps;
            let p = covered as f64 / reps as f64;
            let valid = reps - degenerate;
            cells.push(CoverageCell {
                model: config.model,
                design: config.design,
                d: config.d,
                n: config.n,
                x,
                estimator: est,
                coverage: p,
                se: (p * (1.0 - p) / reps as f64).sqrt(),
                mean_width: if valid > 0 { width_sum / valid as f64 } else { f64::NAN },
                theoretical_level: match est {
                    Estimator::Nw => theoretical_level(1.0, 1.0, Z_95),
                    Estimator::Averaged => averaged_level,
                },
                reps,
                degenerate,
            });
        }
    }
    Ok(CoverageReport { cells })
}

/// The full grid for one model and design: n ∈ {50, 100, 200},
/// d ∈ {1, 2}, at `template.points`. Everything else comes from `template`.
pub fn run_table(model: RegressionModel, design: DesignDensity, template: &SimConfig) -> Result<CoverageReport> {
    let mut report = CoverageReport::default();
    for d in TABLE_DS {
        for n in TABLE_NS {
            let cell = SimConfig {
                model,
                design,
                d,
                n,
                ..template.clone()
            };
            report.cells.extend(run_cell(&cell)?.cells);
        }
    }
    Ok(report)
}

/// Standardized errors of an estimator at one point over many replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltDiagnostic {
    pub estimator: Estimator,
    pub x: f64,
    pub n: usize,
    pub reps: usize,
    /// Limiting variance used to standardize; 1 is used instead when it is 0.
    pub limit_variance: f64,
    #[serde(skip)]
    pub standardized: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub ks_distance: f64,
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and
/// the standard normal.
pub fn ks_distance_to_normal(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = normal::cdf(v);
            (((i + 1) as f64 / n) - cdf).max(cdf - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Estimate at `x` after one replication of `config`.
fn point_estimate(config: &SimConfig, x: f64, est: Estimator, rep: u64) -> Result<f64> {
    let history = draw(config, rep);
    let kernel = config.kernel();
    match est {
        Estimator::Averaged => {
            let mut state = RecursiveRegressor::new(vec![x], config.estimator_cfg, kernel)?;
            state.update_all(&history)?;
            Ok(state.r_bar()[0])
        }
        Estimator::Nw => {
            let h = config.estimator_cfg.bandwidth.eval(config.n as u64);
            nadaraya_watson(&history, x, h, &kernel)
        }
    }
}

/// √(nh_n)(estimate - r(x)) / √(limit variance) over `config.reps`
/// replications, where the limit variance is the averaged estimator's
/// balanced-regime variance with c = 0, or the Nadaraya–Watson variance.
pub fn clt_diagnostic(config: &SimConfig, x: f64, est: Estimator) -> Result<CltDiagnostic> {
    config.validate()?;
    let oracle = config.sim_model();
    let kernel = config.kernel();
    let limit_variance = match est {
        Estimator::Averaged => {
            asymp::clt_params_averaged(&oracle, x, &config.estimator_cfg, &kernel, Regime::Balanced { c: 0.0 })?
                .variance
        }
        Estimator::Nw => asymp::nadaraya_watson_variance(&oracle, x, &kernel)?,
    };
    let h = config.estimator_cfg.bandwidth.eval(config.n as u64);
    let scale = (config.n as f64 * h).sqrt() / if limit_variance > 0.0 { limit_variance.sqrt() } else { 1.0 };
    let truth = config.model.eval(x);
    let standardized: Vec<f64> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| point_estimate(config, x, est, rep).map(|v| scale * (v - truth)))
        .collect::<Result<_>>()?;
    let (mean, variance) = mean_and_variance(&standardized);
    Ok(CltDiagnostic {
        estimator: est,
        x,
        n: config.n,
        reps: config.reps,
        limit_variance,
        ks_distance: ks_distance_to_normal(&standardized),
        standardized,
        mean,
        variance,
    })
}

/// Monte Carlo mean of h_n⁻²(r̄_n(x) - r(x)) against the bias-dominant limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasDiagnostic {
    pub x: f64,
    pub n: usize,
    pub reps: usize,
    pub mean: f64,
    pub std_error: f64,
    pub limit: f64,
}

impl BiasDiagnostic {
    pub fn relative_error(&self) -> f64 {
        ((self.mean - self.limit) / self.limit).abs()
    }
}

pub fn bias_diagnostic(config: &SimConfig, x: f64) -> Result<BiasDiagnostic> {
    config.validate()?;
    let oracle = config.sim_model();
    let limit = asymp::clt_params_averaged(&oracle, x, &config.estimator_cfg, &config.kernel(), Regime::BiasDominant)?
        .bias;
    let h = config.estimator_cfg.bandwidth.eval(config.n as u64);
    let truth = config.model.eval(x);
    let scaled: Vec<f64> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| point_estimate(config, x, Estimator::Averaged, rep).map(|v| (v - truth) / (h * h)))
        .collect::<Result<_>>()?;
    let (mean, var) = mean_and_variance(&scaled);
    Ok(BiasDiagnostic {
        x,
        n: config.n,
        reps: config.reps,
        mean,
        std_error: (var / scaled.len() as f64).sqrt(),
        limit,
    })
}
