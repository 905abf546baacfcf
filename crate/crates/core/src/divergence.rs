//! Alpha and beta divergences generated by the Tweedie dual cumulant.
//!
//! For a power index `p` the dual cumulant
//!
//! ```text
//! phi(mu) = mu^(2-p) / ((1-p)(2-p)) - mu / (1-p) + 1 / (2-p)
//! ```
//!
//! is convex with `phi(1) = phi'(1) = 0`. Its Bregman divergence is the beta
//! divergence and its Csiszár f-divergence is the alpha divergence:
//!
//! ```text
//! d_beta(x, mu)  = mu^(2-p) * phi(x / mu)
//! d_alpha(x, mu) = mu       * phi(x / mu)
//! ```
//!
//! Both closed forms are evaluated through `phi` of the ratio `x / mu`, which
//! makes the scale laws hold to rounding and lets a single routine handle the
//! removable singularities at `p = 1` and `p = 2`.

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::power::PowerIndex;

/// `(exp(t * l) - 1) / t`, with the limit `l` at `t = 0`.
///
/// Accurate for small `t` because it goes through `expm1`.
#[inline]
pub(crate) fn expm1_ratio(t: f64, l: f64) -> f64 {
    let z = t * l;
    if t == 0.0 || z == 0.0 {
        l
    } else {
        z.exp_m1() / t
    }
}

/// Taylor series of `phi(1 + s)` around the origin; `phi''(mu) = mu^-p`.
fn phi_near_one(p: f64, s: f64) -> f64 {
    let mut term = 0.5 * s * s;
    let mut sum = term;
    for k in 2..200 {
        term *= s * (-p - (k as f64 - 2.0)) / (k as f64 + 1.0);
        sum += term;
        if term == 0.0 || term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `phi(r)` without argument validation. Requires `r >= 0` unless `p == 0`.
pub(crate) fn phi_unchecked(p: f64, r: f64) -> f64 {
    if p == 0.0 {
        let s = r - 1.0;
        return 0.5 * s * s;
    }
    if r == 0.0 {
        return if p < 2.0 {
            1.0 / (2.0 - p)
        } else {
            f64::INFINITY
        };
    }
    let s = r - 1.0;
    if s.abs() * (2.0 + p.abs()) < 0.1 {
        return phi_near_one(p, s);
    }
    let l = r.ln();
    if p < 1.5 {
        // (r (r^(1-p) - 1)/(1-p) - (r - 1)) / (2-p): regular at p = 1
        (r * expm1_ratio(1.0 - p, l) - s) / (2.0 - p)
    } else {
        // ((r^(2-p) - 1)/(2-p) - (r - 1)) / (1-p): regular at p = 2
        (expm1_ratio(2.0 - p, l) - s) / (1.0 - p)
    }
}

/// `theta(mu) = phi'(mu) = (mu^(1-p) - 1) / (1-p)`, `log mu` at `p = 1`.
pub(crate) fn theta_unchecked(p: f64, mu: f64) -> f64 {
    if p == 0.0 {
        mu - 1.0
    } else {
        expm1_ratio(1.0 - p, mu.ln())
    }
}

fn check_observation(p: f64, x: f64) -> Result<f64> {
    finite("x", x)?;
    if p != 0.0 && x < 0.0 {
        return Err(Error::Domain {
            name: "x",
            value: x,
            requirement: "must be >= 0 when p != 0",
        });
    }
    Ok(x)
}

fn check_mean(p: f64, mu: f64) -> Result<f64> {
    if p == 0.0 {
        finite("mu", mu)
    } else {
        positive("mu", mu)
    }
}

/// The normalized dual cumulant `phi(mu)`.
///
/// `mu` must be positive, except at `p = 0` where any finite value is allowed.
/// At `p = 1` this is `mu log mu - mu + 1` and at `p = 2` it is
/// `-log mu + mu - 1`.
pub fn dual_cumulant(p: PowerIndex, mu: f64) -> Result<f64> {
    let p = p.value();
    check_mean(p, mu)?;
    Ok(phi_unchecked(p, mu))
}

/// Derivative of the dual cumulant, which is the canonical parameter `theta(mu)`.
pub fn dual_cumulant_derivative(p: PowerIndex, mu: f64) -> Result<f64> {
    let p = p.value();
    check_mean(p, mu)?;
    Ok(theta_unchecked(p, mu))
}

/// Beta divergence `d_beta(x, mu)`.
///
/// Euclidean at `p = 0`, Kullback-Leibler at `p = 1` and Itakura-Saito at
/// `p = 2`. Defined for every real `p`. An observation `x = 0` is allowed for
/// `p != 0`; it gives `mu^(2-p) / (2-p)` for `p < 2` and `+inf` for `p >= 2`.
pub fn beta_divergence(p: PowerIndex, x: f64, mu: f64) -> Result<f64> {
    let p = p.value();
    check_observation(p, x)?;
    check_mean(p, mu)?;
    if p == 0.0 {
        let e = x - mu;
        return Ok(0.5 * e * e);
    }
    Ok(mu.powf(2.0 - p) * phi_unchecked(p, x / mu))
}

/// Alpha divergence `d_alpha(x, mu) = mu * phi(x / mu)`.
///
/// Pearson at `p = 0`, KL at `p = 1`, Hellinger `2 (sqrt x - sqrt mu)^2` at
/// `p = 3/2` and reversed KL at `p = 2`. `mu` must be positive for every `p`.
pub fn alpha_divergence(p: PowerIndex, x: f64, mu: f64) -> Result<f64> {
    let p = p.value();
    check_observation(p, x)?;
    positive("mu", mu)?;
    if p == 1.5 {
        // squared Hellinger form, exactly symmetric
        let d = x.sqrt() - mu.sqrt();
        return Ok(2.0 * d * d);
    }
    Ok(mu * phi_unchecked(p, x / mu))
}

/// `mu^(1-p) * d_alpha(x, mu)`, which equals the beta divergence.
pub fn beta_from_alpha(p: PowerIndex, x: f64, mu: f64) -> Result<f64> {
    let alpha = alpha_divergence(p, x, mu)?;
    Ok(mu.powf(1.0 - p.value()) * alpha)
}

/// `d/dmu d_beta(x, mu) = -(x - mu) / mu^p`.
pub fn beta_divergence_grad_mu(p: PowerIndex, x: f64, mu: f64) -> Result<f64> {
    let p = p.value();
    check_observation(p, x)?;
    check_mean(p, mu)?;
    if p == 0.0 {
        return Ok(mu - x);
    }
    Ok(-(x - mu) * mu.powf(-p))
}

/// A differentiable convex scalar function used to generate a divergence.
pub trait ConvexFunction {
    fn value(&self, t: f64) -> Result<f64>;
    fn derivative(&self, t: f64) -> Result<f64>;
}

impl<G: ConvexFunction + ?Sized> ConvexFunction for &G {
    fn value(&self, t: f64) -> Result<f64> {
        (**self).value(t)
    }
    fn derivative(&self, t: f64) -> Result<f64> {
        (**self).derivative(t)
    }
}

/// Integration constants of the dual cumulant,
/// `phi(mu) = mu^(2-p) / ((1-p)(2-p)) + m mu + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConstants {
    pub m: f64,
    pub d: f64,
}

impl IntegrationConstants {
    /// The constants giving `phi(1) = phi'(1) = 0`: `m = -1/(1-p)`, `d = 1/(2-p)`.
    ///
    /// `None` at `p = 1` and `p = 2`, where the normalized generator is a
    /// logarithmic limit rather than a member of this family.
    pub fn normalized(p: PowerIndex) -> Option<Self> {
        let p = p.value();
        if p == 1.0 || p == 2.0 {
            None
        } else {
            Some(IntegrationConstants {
                m: -1.0 / (1.0 - p),
                d: 1.0 / (2.0 - p),
            })
        }
    }
}

/// The Tweedie dual cumulant as a divergence generator.
///
/// Unlike [`dual_cumulant`], the generator also accepts `t = 0` (the closure
/// of its domain) so that divergences at a zero observation can be formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCumulant {
    p: PowerIndex,
    constants: Option<IntegrationConstants>,
}

impl DualCumulant {
    /// The normalized generator.
    pub fn new(p: PowerIndex) -> Self {
        DualCumulant { p, constants: None }
    }

    /// The generator with explicit integration constants. Not available at
    /// `p = 1` or `p = 2`.
    pub fn with_constants(p: PowerIndex, constants: IntegrationConstants) -> Result<Self> {
        if IntegrationConstants::normalized(p).is_none() {
            return Err(Error::InvalidArgument(format!(
                "explicit integration constants are undefined at p = {p}"
            )));
        }
        finite("m", constants.m)?;
        finite("d", constants.d)?;
        Ok(DualCumulant {
            p,
            constants: Some(constants),
        })
    }

    pub fn power(&self) -> PowerIndex {
        self.p
    }

    fn check(&self, t: f64) -> Result<()> {
        finite("t", t)?;
        if self.p.value() != 0.0 && t < 0.0 {
            return Err(Error::Domain {
                name: "t",
                value: t,
                requirement: "generator argument must be >= 0 when p != 0",
            });
        }
        Ok(())
    }
}

impl ConvexFunction for DualCumulant {
    fn value(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let p = self.p.value();
        Ok(match self.constants {
            None => phi_unchecked(p, t),
            Some(c) => t.powf(2.0 - p) / ((1.0 - p) * (2.0 - p)) + c.m * t + c.d,
        })
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let p = self.p.value();
        if p != 0.0 && t == 0.0 {
            return Err(Error::Domain {
                name: "t",
                value: t,
                requirement: "generator derivative needs t > 0",
            });
        }
        Ok(match self.constants {
            None => theta_unchecked(p, t),
            Some(c) => t.powf(1.0 - p) / (1.0 - p) + c.m,
        })
    }
}

/// A generator built from a pair of closures.
pub struct FnConvex<F, D> {
    value: F,
    derivative: D,
}

impl<F, D> FnConvex<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    pub fn new(value: F, derivative: D) -> Self {
        FnConvex { value, derivative }
    }
}

impl<F, D> ConvexFunction for FnConvex<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    fn value(&self, t: f64) -> Result<f64> {
        finite("generator value", (self.value)(t))
    }
    fn derivative(&self, t: f64) -> Result<f64> {
        finite("generator derivative", (self.derivative)(t))
    }
}

/// `g(t) + slope * t + offset`; generates the same Bregman divergence as `g`.
#[derive(Debug, Clone, Copy)]
pub struct Tilted<G> {
    pub inner: G,
    pub slope: f64,
    pub offset: f64,
}

impl<G: ConvexFunction> ConvexFunction for Tilted<G> {
    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.inner.value(t)? + self.slope * t + self.offset)
    }
    fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.inner.derivative(t)? + self.slope)
    }
}

/// Csiszár dual `f*(u) = u f(1/u)`; `d_{f*}(x, mu) = d_f(mu, x)`.
#[derive(Debug, Clone, Copy)]
pub struct CsiszarDual<G>(pub G);

impl<G: ConvexFunction> ConvexFunction for CsiszarDual<G> {
    fn value(&self, u: f64) -> Result<f64> {
        positive("u", u)?;
        Ok(u * self.0.value(1.0 / u)?)
    }
    fn derivative(&self, u: f64) -> Result<f64> {
        positive("u", u)?;
        let v = 1.0 / u;
        Ok(self.0.value(v)? - v * self.0.derivative(v)?)
    }
}

// 10-point Gauss-Legendre nodes and weights on [-1, 1], positive half.
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Bregman divergence `g(x) - g(mu) - (x - mu) g'(mu)`.
///
/// When the three terms cancel to fewer than about four digits, the value is
/// computed instead as `integral_mu^x (g'(t) - g'(mu)) dt` by composite
/// Gauss-Legendre quadrature, which loses far less precision.
pub fn bregman<G: ConvexFunction + ?Sized>(generator: &G, x: f64, mu: f64) -> Result<f64> {
    let gx = generator.value(x)?;
    let gm = generator.value(mu)?;
    let dm = generator.derivative(mu)?;
    let linear = (x - mu) * dm;
    let direct = gx - gm - linear;
    if direct.abs() >= 1e-4 * (gx.abs() + gm.abs() + linear.abs()) {
        return Ok(direct);
    }
    // panels of equal log-width when both points are positive, since the
    // derivative of a power-type generator varies on a log scale
    let panels: Vec<(f64, f64)> = if x > 0.0 && mu > 0.0 {
        let n = ((x / mu).ln().abs() / 0.25).ceil().clamp(1.0, 1000.0) as usize;
        let step = (x / mu).ln() / n as f64;
        (0..n)
            .map(|i| {
                (
                    mu * (step * i as f64).exp(),
                    mu * (step * (i + 1) as f64).exp(),
                )
            })
            .collect()
    } else {
        let step = (x - mu) / 16.0;
        (0..16)
            .map(|i| (mu + step * i as f64, mu + step * (i + 1) as f64))
            .collect()
    };
    let mut total = 0.0;
    for (a, b) in panels {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = 0.0;
        for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let pair = generator.derivative(mid - half * node)?
                + generator.derivative(mid + half * node)?;
            sum += weight * (pair - 2.0 * dm);
        }
        total += sum * half;
    }
    Ok(total)
}

/// Csiszár f-divergence `mu f(x / mu)`.
pub fn f_divergence<G: ConvexFunction + ?Sized>(generator: &G, x: f64, mu: f64) -> Result<f64> {
    finite("x", x)?;
    positive("mu", mu)?;
    Ok(mu * generator.value(x / mu)?)
}
