//! Tweedie exponential dispersion models `Tw_p(mu, phi)`.
//!
//! The density is written in beta-divergence form
//!
//! ```text
//! f(x; mu, phi) = g(x, phi) exp(-d_beta(x, mu) / phi)
//! ```
//!
//! so only the base measure `g` depends on the evaluation method. `g` is exact
//! for `p` in `{0, 1, 2, 3}`, a series for `1 < p < 2`, and otherwise the
//! saddlepoint approximation `(2 pi phi x^p)^(-1/2)`.

use serde::{Deserialize, Serialize};

use crate::divergence::{beta_divergence, expm1_ratio, theta_unchecked};
use crate::error::{finite, positive, Error, Result};
use crate::power::{ModelClass, PowerIndex};
use crate::series;

const LN_2PI: f64 = 1.8378770664093453;

/// Parameters `(mu, phi, p)` of a Tweedie model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TweedieParams {
    mu: f64,
    phi: f64,
    p: PowerIndex,
}

impl TweedieParams {
    /// Validates the parameters.
    ///
    /// `mu` must be positive except for the Gaussian (`p = 0`), `phi` must be
    /// positive, and `p` must not lie in `(0, 1)`. The Poisson model only
    /// exists with `phi = 1`.
    pub fn new(mu: f64, phi: f64, p: PowerIndex) -> Result<Self> {
        let p = p.require_model()?;
        if p.value() == 0.0 {
            finite("mu", mu)?;
        } else {
            positive("mu", mu)?;
        }
        positive("phi", phi)?;
        if p.class() == ModelClass::Poisson && phi != 1.0 {
            return Err(Error::Domain {
                name: "phi",
                value: phi,
                requirement: "the Poisson model requires phi = 1",
            });
        }
        Ok(TweedieParams { mu, phi, p })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn p(&self) -> PowerIndex {
        self.p
    }

    /// `Var(X) = phi * mu^p`.
    pub fn variance(&self) -> f64 {
        self.phi * variance_unchecked(self.p.value(), self.mu)
    }

    /// Rate of the Poisson count in the compound-Poisson representation,
    /// `mu^(2-p) / (phi (2-p))`. Only meaningful for `1 < p < 2`.
    pub fn poisson_rate(&self) -> f64 {
        let p = self.p.value();
        self.mu.powf(2.0 - p) / (self.phi * (2.0 - p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    ExactClosedForm,
    Series,
    Saddlepoint,
}

impl DensityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityMethod::ExactClosedForm => "exact_closed_form",
            DensityMethod::Series => "series",
            DensityMethod::Saddlepoint => "saddlepoint",
        }
    }

    /// The method used when none is requested.
    pub fn default_for(p: PowerIndex) -> Self {
        match p.class() {
            c if c.has_closed_form() => DensityMethod::ExactClosedForm,
            ModelClass::CompoundPoisson => DensityMethod::Series,
            _ => DensityMethod::Saddlepoint,
        }
    }

    fn supports(self, p: PowerIndex) -> bool {
        match self {
            DensityMethod::ExactClosedForm => p.class().has_closed_form(),
            DensityMethod::Series => p.class() == ModelClass::CompoundPoisson,
            DensityMethod::Saddlepoint => p.class() != ModelClass::NoModel,
        }
    }
}

/// A log-density value with the method that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub log_density: f64,
    pub method: DensityMethod,
    /// Number of series terms summed; zero unless `method` is `Series`.
    pub series_terms_used: usize,
    pub warnings: Vec<String>,
}

/// Canonical parameter and cumulant value at a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPair {
    pub theta: f64,
    pub psi: f64,
}

fn check_mean(p: f64, mu: f64) -> Result<f64> {
    if p == 0.0 {
        finite("mu", mu)
    } else {
        positive("mu", mu)
    }
}

fn variance_unchecked(p: f64, mu: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        mu.powf(p)
    }
}

/// Power variance function `v(mu) = mu^p`. At `p = 0` any finite mean gives 1.
pub fn variance_function(p: PowerIndex, mu: f64) -> Result<f64> {
    check_mean(p.value(), mu)?;
    Ok(variance_unchecked(p.value(), mu))
}

/// Canonical parameter `theta(mu) = (mu^(1-p) - 1) / (1-p)`, `log mu` at `p = 1`.
pub fn theta_of_mu(p: PowerIndex, mu: f64) -> Result<f64> {
    check_mean(p.value(), mu)?;
    Ok(theta_unchecked(p.value(), mu))
}

/// Inverse of [`theta_of_mu`].
pub fn mu_of_theta(p: PowerIndex, theta: f64) -> Result<f64> {
    Ok(log_mu_of_theta(p.value(), theta)?.exp())
}

fn log_mu_of_theta(p: f64, theta: f64) -> Result<f64> {
    finite("theta", theta)?;
    if p == 0.0 {
        return Err(Error::InvalidArgument(
            "log mean is undefined for the Gaussian model".into(),
        ));
    }
    let a = 1.0 - p;
    if a == 0.0 {
        return Ok(theta);
    }
    let base = a * theta;
    if base <= -1.0 {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            requirement: "1 + (1-p) theta must be > 0",
        });
    }
    Ok(base.ln_1p() / a)
}

/// Cumulant function `psi(theta)` under the normalized constants, so that
/// `psi(0) = 0` and `psi'(theta) = mu(theta)`.
pub fn cumulant(p: PowerIndex, theta: f64) -> Result<f64> {
    let p = p.value();
    if p == 0.0 {
        finite("theta", theta)?;
        let mu = theta + 1.0;
        return Ok(0.5 * (mu * mu - 1.0));
    }
    Ok(expm1_ratio(2.0 - p, log_mu_of_theta(p, theta)?))
}

/// `psi(theta(mu)) = (mu^(2-p) - 1) / (2-p)`, `log mu` at `p = 2`.
///
/// Different integration constants shift `psi` by an affine function of
/// `theta`; densities and divergences do not depend on that choice.
pub fn cumulant_at_mu(p: PowerIndex, mu: f64) -> Result<f64> {
    let pv = p.value();
    check_mean(pv, mu)?;
    if pv == 0.0 {
        return Ok(0.5 * (mu * mu - 1.0));
    }
    Ok(expm1_ratio(2.0 - pv, mu.ln()))
}

pub fn canonical_pair(p: PowerIndex, mu: f64) -> Result<CanonicalPair> {
    Ok(CanonicalPair {
        theta: theta_of_mu(p, mu)?,
        psi: cumulant_at_mu(p, mu)?,
    })
}

/// Unit deviance `2 d_beta(x, mu)`.
pub fn unit_deviance(p: PowerIndex, x: f64, mu: f64) -> Result<f64> {
    Ok(2.0 * beta_divergence(p, x, mu)?)
}

fn check_support(p: PowerIndex, x: f64) -> Result<()> {
    finite("x", x)?;
    let ok = match p.class() {
        ModelClass::Gaussian => true,
        ModelClass::Poisson => x >= 0.0 && x.fract() == 0.0,
        ModelClass::CompoundPoisson => x >= 0.0,
        _ => x > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutsideSupport { p: p.value(), x })
    }
}

fn log_base_exact(p: PowerIndex, phi: f64, x: f64) -> f64 {
    match p.class() {
        ModelClass::Gaussian => -0.5 * (LN_2PI + phi.ln()),
        ModelClass::Poisson => {
            let xlogx = if x == 0.0 { 0.0 } else { x * x.ln() };
            xlogx - x - libm::lgamma(x + 1.0)
        }
        ModelClass::Gamma => {
            let shape = 1.0 / phi;
            -x.ln() + shape * shape.ln() - shape - libm::lgamma(shape)
        }
        ModelClass::InverseGaussian => -0.5 * (LN_2PI + phi.ln() + 3.0 * x.ln()),
        _ => unreachable!("no closed form for p = {p}"),
    }
}

fn log_base_saddlepoint(p: f64, phi: f64, x: f64) -> f64 {
    -0.5 * (LN_2PI + phi.ln() + p * x.ln())
}

/// Log base measure `log g(x, phi)` for the chosen method.
///
/// Returns the value, the method actually used and the series term count.
pub fn log_base_measure(
    p: PowerIndex,
    phi: f64,
    x: f64,
    method: Option<DensityMethod>,
) -> Result<DensityEval> {
    p.require_model()?;
    positive("phi", phi)?;
    check_support(p, x)?;
    let method = method.unwrap_or_else(|| DensityMethod::default_for(p));
    if !method.supports(p) {
        return Err(Error::UnsupportedMethod {
            p: p.value(),
            method,
        });
    }

    if p.class() == ModelClass::CompoundPoisson && x == 0.0 {
        // point mass: P(X = 0) = exp(-d_beta(0, mu) / phi)
        return Ok(DensityEval {
            log_density: 0.0,
            method: DensityMethod::Series,
            series_terms_used: 0,
            warnings: vec!["atom: value is log P(X = 0), not a density".into()],
        });
    }

    let mut warnings = Vec::new();
    let (log_g, terms) = match method {
        DensityMethod::ExactClosedForm => (log_base_exact(p, phi, x), 0),
        DensityMethod::Series => series::log_base_measure(x, phi, p.value())?,
        DensityMethod::Saddlepoint => {
            if x == 0.0 {
                return Err(Error::OutsideSupport { p: p.value(), x });
            }
            warnings.push("saddlepoint approximation of the base measure".into());
            (log_base_saddlepoint(p.value(), phi, x), 0)
        }
    };
    Ok(DensityEval {
        log_density: log_g,
        method,
        series_terms_used: terms,
        warnings,
    })
}

/// `log f(x) = log g(x, phi) - d_beta(x, mu) / phi`.
///
/// For `1 < p < 2` the value at `x = 0` is the log of the point mass
/// `P(X = 0) = exp(-mu^(2-p) / (phi (2-p)))`.
pub fn log_density(
    params: &TweedieParams,
    x: f64,
    method: Option<DensityMethod>,
) -> Result<DensityEval> {
    let mut eval = log_base_measure(params.p, params.phi, x, method)?;
    let d = beta_divergence(params.p, x, params.mu)?;
    eval.log_density -= d / params.phi;
    Ok(eval)
}

/// Parameters of `c X` when `X ~ Tw_p(mu, phi)`: `Tw_p(c mu, c^(2-p) phi)`.
///
/// The Poisson model is only closed under the identity scaling.
pub fn scale_transform(params: &TweedieParams, c: f64) -> Result<TweedieParams> {
    positive("c", c)?;
    let p = params.p;
    if p.class() == ModelClass::Poisson && c != 1.0 {
        return Err(Error::InvalidArgument(
            "a scaled Poisson variable is not a Poisson variable".into(),
        ));
    }
    TweedieParams::new(c * params.mu, c.powf(2.0 - p.value()) * params.phi, p)
}
