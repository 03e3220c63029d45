//! Regularly varying positive sequences and the exponent conditions that
//! stepsizes, bandwidths and averaging weights must satisfy.
//!
//! Every sequence has the closed form `scale · n^(-power) · (ln n)^log_power`
//! for `n >= 2` and equals `scale` at `n = 1`. A sequence of this form
//! satisfies `n·[1 - v_{n-1}/v_n] → -power`, so its class exponent is known
//! symbolically and the interval conditions below can be decided exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Values closer than this to an open-interval endpoint count as on it.
const BOUNDARY_EPS: f64 = 1e-12;

/// A positive sequence `scale · n^(-power) · (ln n)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct SequenceSpec {
    scale: f64,
    power: f64,
    log_power: f64,
}

#[derive(Deserialize)]
struct RawSequence {
    scale: f64,
    power: f64,
    #[serde(default)]
    log_power: f64,
}

impl TryFrom<RawSequence> for SequenceSpec {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        SequenceSpec::new(raw.scale, raw.power, raw.log_power)
    }
}

impl SequenceSpec {
    pub fn new(scale: f64, power: f64, log_power: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSequence(format!(
                "scale must be finite and positive, got {scale}"
            )));
        }
        if !power.is_finite() || !log_power.is_finite() {
            return Err(Error::InvalidSequence(format!(
                "exponents must be finite, got power={power}, log_power={log_power}"
            )));
        }
        Ok(Self {
            scale,
            power,
            log_power,
        })
    }

    /// `scale · n^(-power)`.
    pub fn power_law(scale: f64, power: f64) -> Result<Self> {
        Self::new(scale, power, 0.0)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(value, 0.0, 0.0)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn log_power(&self) -> f64 {
        self.log_power
    }

    /// The class exponent `-power`.
    pub fn gs_exponent(&self) -> f64 {
        -self.power
    }

    /// Value at index `n >= 1`. The `n = 1` term is `scale`, since `ln 1 = 0`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`; sequences are indexed from 1.
    pub fn eval(&self, n: u64) -> f64 {
        assert!(n >= 1, "sequences are indexed from n = 1");
        if n == 1 {
            return self.scale;
        }
        let nf = n as f64;
        let mut v = self.scale * nf.powf(-self.power);
        if self.log_power != 0.0 {
            v *= nf.ln().powf(self.log_power);
        }
        v
    }

    /// Numeric estimate `n_max · [1 - v_{n_max-1} / v_{n_max}]` of the class
    /// exponent. The ratio is formed in log space so the result keeps full
    /// precision when `1 - ratio` is tiny.
    ///
    /// # Panics
    ///
    /// Panics if `n_max < 2`.
    pub fn gs_exponent_estimate(&self, n_max: u64) -> f64 {
        assert!(n_max >= 2, "need two consecutive terms");
        let n = n_max as f64;
        if n_max == 2 {
            return n * (1.0 - self.eval(1) / self.eval(2));
        }
        let prev = (n_max - 1) as f64;
        // ln(v_{n-1}/v_n) = -p·ln((n-1)/n) + b·ln(ln(n-1)/ln n)
        let mut log_ratio = -self.power * (-1.0 / n).ln_1p();
        if self.log_power != 0.0 {
            log_ratio += self.log_power * (prev.ln() / n.ln()).ln();
        }
        -n * log_ratio.exp_m1()
    }

    /// Supremum over `n >= 1` of the closed form, or `None` when the
    /// sequence is unbounded.
    pub fn supremum(&self) -> Option<f64> {
        let (p, b) = (self.power, self.log_power);
        if p < 0.0 || (p == 0.0 && b > 0.0) {
            return None;
        }
        let mut best = self.eval(1).max(self.eval(2));
        if p > 0.0 && b > 0.0 {
            // n^(-p)(ln n)^b peaks at ln n = b/p.
            let peak = (b / p).exp();
            if peak.is_finite() {
                for n in [peak.floor(), peak.ceil()] {
                    if n >= 2.0 && n < u64::MAX as f64 {
                        best = best.max(self.eval(n as u64));
                    }
                }
            } else {
                return None;
            }
        }
        Some(best)
    }

    /// Pointwise ratio `self_n / other_n`, itself a sequence of this form.
    pub fn ratio(&self, other: &SequenceSpec) -> SequenceSpec {
        SequenceSpec {
            scale: self.scale / other.scale,
            power: self.power - other.power,
            log_power: self.log_power - other.log_power,
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·n^(-{})", self.scale, self.power)?;
        if self.log_power != 0.0 {
            write!(f, "·(ln n)^({})", self.log_power)?;
        }
        Ok(())
    }
}

/// Sequences driving the recursive estimators.
///
/// The exponents `alpha`, `a` and `q` are read off the sequences themselves
/// so they cannot disagree with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEstimatorConfig")]
pub struct EstimatorConfig {
    /// Stepsize γₙ of the regression recursion.
    pub stepsize: SequenceSpec,
    /// Bandwidth hₙ.
    pub bandwidth: SequenceSpec,
    /// Averaging weights qₙ.
    pub weights: SequenceSpec,
    /// Stepsize βₙ of the recursive density estimator.
    pub density_stepsize: SequenceSpec,
}

#[derive(Deserialize)]
struct RawEstimatorConfig {
    stepsize: SequenceSpec,
    bandwidth: SequenceSpec,
    weights: SequenceSpec,
    density_stepsize: SequenceSpec,
}

impl TryFrom<RawEstimatorConfig> for EstimatorConfig {
    type Error = Error;

    fn try_from(raw: RawEstimatorConfig) -> Result<Self> {
        EstimatorConfig::new(
            raw.stepsize,
            raw.bandwidth,
            raw.weights,
            raw.density_stepsize,
        )
    }
}

impl EstimatorConfig {
    pub fn new(
        stepsize: SequenceSpec,
        bandwidth: SequenceSpec,
        weights: SequenceSpec,
        density_stepsize: SequenceSpec,
    ) -> Result<Self> {
        if stepsize.power() > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "stepsize power {} > 1 makes the stepsizes summable",
                stepsize.power()
            )));
        }
        Ok(Self {
            stepsize,
            bandwidth,
            weights,
            density_stepsize,
        })
    }

    /// γₙ = n^(-0.9), hₙ = qₙ = n^(-1/5)(ln n)^(-1), βₙ = (4/5)n^(-1): a
    /// slightly undersmoothing bandwidth with variance-minimizing weights.
    pub fn undersmoothing() -> Self {
        let h = SequenceSpec::new(1.0, 0.2, -1.0).expect("valid");
        Self {
            stepsize: SequenceSpec::power_law(1.0, 0.9).expect("valid"),
            bandwidth: h,
            weights: h,
            density_stepsize: SequenceSpec::power_law(0.8, 1.0).expect("valid"),
        }
    }

    /// Exponent α with γₙ ∈ GS(-α).
    pub fn alpha(&self) -> f64 {
        self.stepsize.power()
    }

    /// Exponent a with hₙ ∈ GS(-a).
    pub fn a(&self) -> f64 {
        self.bandwidth.power()
    }

    /// Exponent q with qₙ ∈ GS(-q).
    pub fn q(&self) -> f64 {
        self.weights.power()
    }

    /// Checks `γₙ hₙ⁻¹ ‖K‖∞ <= 1` for every `n >= 1`, which keeps each
    /// update factor `1 - γₙZₙ(x)` in `[0, 1]`.
    pub fn check_contraction(&self, kernel: &Kernel) -> Result<()> {
        let ratio = self.stepsize.ratio(&self.bandwidth);
        match ratio.supremum() {
            Some(sup) if sup * kernel.sup_norm() <= 1.0 => Ok(()),
            Some(sup) => Err(Error::InvalidConfig(format!(
                "sup_n gamma_n/h_n * ||K||_inf = {} exceeds 1",
                sup * kernel.sup_norm()
            ))),
            None => Err(Error::InvalidConfig(
                "gamma_n/h_n is unbounded".to_string(),
            )),
        }
    }

    /// Density stepsizes must never exceed one.
    pub fn check_density_stepsize(&self) -> Result<()> {
        match self.density_stepsize.supremum() {
            Some(sup) if sup <= 1.0 => Ok(()),
            Some(sup) => Err(Error::InvalidConfig(format!(
                "sup_n beta_n = {sup} exceeds 1"
            ))),
            None => Err(Error::InvalidConfig("beta_n is unbounded".to_string())),
        }
    }
}

/// Which estimator the assumptions are checked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Generalized,
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub id: &'static str,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, id: &'static str, passed: bool, message: impl Into<String>) {
        self.checks.push(AssumptionCheck {
            id,
            passed,
            message: message.into(),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::AssumptionsFailed(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", c.id, c.message)?;
        }
        Ok(())
    }
}

fn in_open(v: f64, lo: f64, hi: f64) -> bool {
    v > lo + BOUNDARY_EPS && v < hi - BOUNDARY_EPS
}

/// Symbolic check of the exponent conditions on `cfg`.
///
/// Generalized mode: α ∈ (3/4, 1], (nγₙ)⁻¹ has a finite limit,
/// a ∈ ((1-α)/4, α/3). Averaged mode additionally requires
/// a ∈ (1-α, (4α-3)/2), q < min{1-2a, (1+a)/2} and
/// nγₙ / ln(Σγₖ) → ∞.
pub fn validate_assumptions(cfg: &EstimatorConfig, mode: Mode) -> ValidationReport {
    let mut report = ValidationReport::default();
    let alpha = cfg.alpha();
    let a = cfg.a();
    let q = cfg.q();
    let step = cfg.stepsize;

    report.push(
        "A2.i stepsize exponent",
        alpha > 0.75 + BOUNDARY_EPS && alpha <= 1.0,
        format!("alpha = {alpha} must lie in (3/4, 1]"),
    );
    let xi_exists = step.power() < 1.0 || step.log_power() >= 0.0;
    report.push(
        "A2.i limit of (n gamma_n)^-1",
        xi_exists,
        if xi_exists {
            format!("(n gamma_n)^-1 converges for gamma_n = {step}")
        } else {
            format!("(n gamma_n)^-1 diverges for gamma_n = {step}")
        },
    );
    let (lo, hi) = ((1.0 - alpha) / 4.0, alpha / 3.0);
    report.push(
        "A2.ii bandwidth exponent",
        in_open(a, lo, hi),
        format!("a = {a} must lie in ({lo:.6}, {hi:.6})"),
    );

    if mode == Mode::Averaged {
        let (lo, hi) = (1.0 - alpha, (4.0 * alpha - 3.0) / 2.0);
        report.push(
            "A5 bandwidth exponent",
            in_open(a, lo, hi),
            format!("a = {a} must lie in ({lo:.6}, {hi:.6})"),
        );
        let fast = step.power() < 1.0 || (step.power() == 1.0 && step.log_power() > 0.0);
        report.push(
            "A5 n gamma_n / ln(sum gamma_k) -> inf",
            fast,
            if fast {
                format!("holds for gamma_n = {step}")
            } else {
                format!("fails for gamma_n = {step}: need power < 1, or power 1 with log_power > 0")
            },
        );
        let bound = (1.0 - 2.0 * a).min((1.0 + a) / 2.0);
        report.push(
            "A6 weight exponent",
            q < bound - BOUNDARY_EPS,
            format!("q = {q} must be < min(1 - 2a, (1 + a)/2) = {bound}"),
        );
    }
    report
}
