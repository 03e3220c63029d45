//! Kernels and their moment functionals.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Epanechnikov,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Epanechnikov => "epanechnikov",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            other => Err(format!("unknown kernel {other:?}")),
        }
    }
}

/// A nonnegative, symmetric, Lipschitz kernel with its moments stored in
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    integral: f64,
    first_moment: f64,
    second_moment: f64,
    square_integral: f64,
    sup_norm: f64,
    lipschitz_constant: f64,
}

impl Kernel {
    /// Standard normal density.
    pub fn gaussian() -> Self {
        Kernel {
            family: KernelFamily::Gaussian,
            integral: 1.0,
            first_moment: 0.0,
            second_moment: 1.0,
            square_integral: 1.0 / (2.0 * PI.sqrt()),
            sup_norm: INV_SQRT_2PI,
            // |K'(z)| = |z|K(z) peaks at |z| = 1
            lipschitz_constant: INV_SQRT_2PI * (-0.5f64).exp(),
        }
    }

    /// `0.75(1 - z²)` on `[-1, 1]`.
    pub fn epanechnikov() -> Self {
        Kernel {
            family: KernelFamily::Epanechnikov,
            integral: 1.0,
            first_moment: 0.0,
            second_moment: 0.2,
            square_integral: 0.6,
            sup_norm: 0.75,
            lipschitz_constant: 1.5,
        }
    }

    pub fn from_family(family: KernelFamily) -> Self {
        match family {
            KernelFamily::Gaussian => Self::gaussian(),
            KernelFamily::Epanechnikov => Self::epanechnikov(),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => INV_SQRT_2PI * (-0.5 * z * z).exp(),
            KernelFamily::Epanechnikov => {
                if z.abs() <= 1.0 {
                    0.75 * (1.0 - z * z)
                } else {
                    0.0
                }
            }
        }
    }

    /// `h⁻¹ K((x - xi) / h)`.
    #[inline]
    pub fn scaled(&self, x: f64, xi: f64, h: f64) -> f64 {
        self.eval((x - xi) / h) / h
    }

    /// `∫ z^order K(z) dz` for `order` in `0..=2`.
    pub fn moment(&self, order: u32) -> Option<f64> {
        match order {
            0 => Some(self.integral),
            1 => Some(self.first_moment),
            2 => Some(self.second_moment),
            _ => None,
        }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `∫ K²(z) dz`.
    pub fn square_integral(&self) -> f64 {
        self.square_integral
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz_constant
    }

    /// Half-width of an interval outside of which the kernel is negligible
    /// (exactly zero for compact support).
    pub fn effective_support(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 40.0 / SQRT_2,
            KernelFamily::Epanechnikov => 1.0,
        }
    }
}
