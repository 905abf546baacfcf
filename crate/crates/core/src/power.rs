//! The power index `p` of a power variance function `v(mu) = mu^p`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Model class implied by a power index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelClass {
    /// `p = 0`
    Gaussian,
    /// `p = 1`
    Poisson,
    /// `1 < p < 2`, Poisson sum of gamma variables.
    CompoundPoisson,
    /// `p = 2`
    Gamma,
    /// `p = 3`
    InverseGaussian,
    /// `p < 0`, `2 < p < 3` or `p > 3`: a model exists but has no closed-form density.
    OtherValid,
    /// `0 < p < 1`: no exponential dispersion model has this variance function.
    NoModel,
}

impl ModelClass {
    pub fn of(p: f64) -> Self {
        if p == 0.0 {
            ModelClass::Gaussian
        } else if p == 1.0 {
            ModelClass::Poisson
        } else if p == 2.0 {
            ModelClass::Gamma
        } else if p == 3.0 {
            ModelClass::InverseGaussian
        } else if p > 0.0 && p < 1.0 {
            ModelClass::NoModel
        } else if p > 1.0 && p < 2.0 {
            ModelClass::CompoundPoisson
        } else {
            ModelClass::OtherValid
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelClass::Gaussian => "Gaussian",
            ModelClass::Poisson => "Poisson",
            ModelClass::CompoundPoisson => "Comp. Poisson",
            ModelClass::Gamma => "Gamma",
            ModelClass::InverseGaussian => "Inv. Gaussian",
            ModelClass::OtherValid => "Tweedie",
            ModelClass::NoModel => "none",
        }
    }

    /// Whether the density has a closed form.
    pub fn has_closed_form(self) -> bool {
        matches!(
            self,
            ModelClass::Gaussian
                | ModelClass::Poisson
                | ModelClass::Gamma
                | ModelClass::InverseGaussian
        )
    }
}

/// A finite real power index.
///
/// Every real `p` is accepted: divergences are defined for all of them. Use
/// [`PowerIndex::require_model`] before statistical work.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PowerIndex(f64);

impl PowerIndex {
    pub const GAUSSIAN: PowerIndex = PowerIndex(0.0);
    pub const POISSON: PowerIndex = PowerIndex(1.0);
    pub const HELLINGER: PowerIndex = PowerIndex(1.5);
    pub const GAMMA: PowerIndex = PowerIndex(2.0);
    pub const INVERSE_GAUSSIAN: PowerIndex = PowerIndex(3.0);

    pub fn new(p: f64) -> Result<Self> {
        finite("p", p).map(PowerIndex)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn class(self) -> ModelClass {
        ModelClass::of(self.0)
    }

    pub fn require_model(self) -> Result<Self> {
        if self.class() == ModelClass::NoModel {
            Err(Error::NoModel(self.0))
        } else {
            Ok(self)
        }
    }

    /// Index of the alpha divergence with swapped arguments: `3 - p`.
    pub fn alpha_dual(self) -> Self {
        PowerIndex(alpha_dual_index(self.0))
    }
}

impl TryFrom<f64> for PowerIndex {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        PowerIndex::new(p)
    }
}

impl From<PowerIndex> for f64 {
    fn from(p: PowerIndex) -> f64 {
        p.0
    }
}

impl fmt::Display for PowerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `d_p(x, mu) = d_{3-p}(mu, x)` for alpha divergences.
pub fn alpha_dual_index(p: f64) -> f64 {
    3.0 - p
}

/// Converts `p` to the `q = 2 - p` index used by the common alpha/beta parameterization.
pub fn q_from_p(p: f64) -> f64 {
    2.0 - p
}

/// Inverse of [`q_from_p`].
pub fn p_from_q(q: f64) -> f64 {
    2.0 - q
}
