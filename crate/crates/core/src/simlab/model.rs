use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::asymp::ModelOracle;
use crate::normal;

/// True regression function r(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionModel {
    /// cos x
    #[serde(rename = "cos")]
    Cosine,
    /// 0.3 exp(-4(x+1)²) + 0.7 exp(-16(x-1)²)
    BimodalExp,
    /// 1 + 0.4x
    Linear,
    Constant(f64),
}

impl RegressionModel {
    pub const TABLE_MODELS: [RegressionModel; 3] = [
        RegressionModel::Cosine,
        RegressionModel::BimodalExp,
        RegressionModel::Linear,
    ];

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RegressionModel::Cosine => x.cos(),
            RegressionModel::BimodalExp => {
                0.3 * (-4.0 * (x + 1.0).powi(2)).exp() + 0.7 * (-16.0 * (x - 1.0).powi(2)).exp()
            }
            RegressionModel::Linear => 1.0 + 0.4 * x,
            RegressionModel::Constant(c) => c,
        }
    }
}

impl fmt::Display for RegressionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressionModel::Cosine => f.write_str("cos"),
            RegressionModel::BimodalExp => f.write_str("bimodal_exp"),
            RegressionModel::Linear => f.write_str("linear"),
            RegressionModel::Constant(c) => write!(f, "constant={c}"),
        }
    }
}

impl FromStr for RegressionModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cos" => Ok(RegressionModel::Cosine),
            "bimodal_exp" => Ok(RegressionModel::BimodalExp),
            "linear" => Ok(RegressionModel::Linear),
            other => match other.strip_prefix("constant=") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(RegressionModel::Constant)
                    .ok_or_else(|| format!("bad constant in {other:?}")),
                None => Err(format!(
                    "unknown model {other:?} (expected cos, bimodal_exp, linear or constant=<value>)"
                )),
            },
        }
    }
}

/// Distribution of the design variable X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignDensity {
    StdNormal,
    /// ½N(-½, 1) + ½N(½, 1)
    NormalMixture,
    /// Student t with 6 degrees of freedom.
    Student6,
}

/// Γ(7/2) / (√(6π) Γ(3)) = 15 / (16√6).
const STUDENT6_NORM: f64 = 0.382_732_772_234_844_4;

impl DesignDensity {
    pub const ALL: [DesignDensity; 3] = [
        DesignDensity::StdNormal,
        DesignDensity::NormalMixture,
        DesignDensity::Student6,
    ];

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DesignDensity::StdNormal => normal::pdf(x),
            DesignDensity::NormalMixture => 0.5 * (normal::pdf(x + 0.5) + normal::pdf(x - 0.5)),
            DesignDensity::Student6 => STUDENT6_NORM * (1.0 + x * x / 6.0).powf(-3.5),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DesignDensity::StdNormal => rng.sample(StandardNormal),
            DesignDensity::NormalMixture => {
                let shift = if rng.random::<bool>() { 0.5 } else { -0.5 };
                shift + rng.sample::<f64, _>(StandardNormal)
            }
            DesignDensity::Student6 => {
                let z: f64 = rng.sample(StandardNormal);
                let chi2: f64 = (0..6)
                    .map(|_| rng.sample::<f64, _>(StandardNormal).powi(2))
                    .sum();
                z / (chi2 / 6.0).sqrt()
            }
        }
    }
}

impl fmt::Display for DesignDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignDensity::StdNormal => "std_normal",
            DesignDensity::NormalMixture => "normal_mixture",
            DesignDensity::Student6 => "student6",
        })
    }
}

impl FromStr for DesignDensity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "std_normal" => Ok(DesignDensity::StdNormal),
            "normal_mixture" => Ok(DesignDensity::NormalMixture),
            "student6" => Ok(DesignDensity::Student6),
            other => Err(format!(
                "unknown design {other:?} (expected std_normal, normal_mixture or student6)"
            )),
        }
    }
}

/// Y = r(X) + d·ε with X from `design` and ε standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimModel {
    pub model: RegressionModel,
    pub design: DesignDensity,
    pub noise: f64,
}

impl SimModel {
    /// Draws X first, then ε, from the same stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x = self.design.sample(rng);
        let eps: f64 = rng.sample(StandardNormal);
        (x, self.model.eval(x) + self.noise * eps)
    }
}

impl ModelOracle for SimModel {
    fn regression(&self, x: f64) -> f64 {
        self.model.eval(x)
    }

    fn density(&self, x: f64) -> f64 {
        self.design.pdf(x)
    }

    fn cond_var(&self, _x: f64) -> f64 {
        self.noise * self.noise
    }
}
