//! Random variates from Tweedie models.
//!
//! The generator is `ChaCha8Rng` seeded with [`rand::SeedableRng::seed_from_u64`].
//! Streams are reproducible for a given seed within this crate; ports to other
//! languages should reproduce the statistics, not the bits.
//!
//! | `p`       | draw                                                         |
//! |-----------|--------------------------------------------------------------|
//! | 0         | normal, mean `mu`, variance `phi`                             |
//! | 1         | Poisson, mean `mu`                                            |
//! | (1, 2)    | `N ~ Poisson(lambda)`, `X = G_1 + ... + G_N`, gamma summands  |
//! | 2         | gamma, shape `1/phi`, mean `mu`                               |
//! | 3         | inverse Gaussian, mean `mu`, shape `1/phi`                    |
//!
//! Other indices need stable-law machinery and are rejected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{scale_transform, TweedieParams};
use crate::power::ModelClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        SamplerConfig { seed, n }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn param_error<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidArgument(e.to_string())
}

enum Variate {
    Normal(Normal<f64>),
    Poisson(Poisson<f64>),
    CompoundPoisson {
        count: Option<Poisson<f64>>,
        shape: f64,
        scale: f64,
    },
    Gamma(Gamma<f64>),
    InverseGaussian(InverseGaussian<f64>),
}

impl Variate {
    fn new(params: &TweedieParams) -> Result<Self> {
        let (mu, phi, p) = (params.mu(), params.phi(), params.p().value());
        Ok(match params.p().class() {
            ModelClass::Gaussian => {
                Variate::Normal(Normal::new(mu, phi.sqrt()).map_err(param_error)?)
            }
            ModelClass::Poisson => Variate::Poisson(Poisson::new(mu).map_err(param_error)?),
            ModelClass::CompoundPoisson => {
                let rate = params.poisson_rate();
                // Poisson::new rejects a zero rate; it can underflow for tiny means
                let count = if rate > 0.0 {
                    Some(Poisson::new(rate).map_err(param_error)?)
                } else {
                    None
                };
                Variate::CompoundPoisson {
                    count,
                    shape: (2.0 - p) / (p - 1.0),
                    scale: phi * (p - 1.0) * mu.powf(p - 1.0),
                }
            }
            ModelClass::Gamma => {
                Variate::Gamma(Gamma::new(1.0 / phi, mu * phi).map_err(param_error)?)
            }
            ModelClass::InverseGaussian => {
                Variate::InverseGaussian(InverseGaussian::new(mu, 1.0 / phi).map_err(param_error)?)
            }
            ModelClass::OtherValid | ModelClass::NoModel => {
                return Err(Error::UnsupportedSampler(p))
            }
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(match self {
            Variate::Normal(d) => d.sample(rng),
            Variate::Poisson(d) => d.sample(rng),
            Variate::CompoundPoisson {
                count,
                shape,
                scale,
            } => {
                let n = count.as_ref().map_or(0.0, |d| d.sample(rng));
                if n == 0.0 {
                    0.0
                } else {
                    // sum of n iid Gamma(shape, scale) is Gamma(n * shape, scale)
                    Gamma::new(n * shape, *scale)
                        .map_err(param_error)?
                        .sample(rng)
                }
            }
            Variate::Gamma(d) => d.sample(rng),
            Variate::InverseGaussian(d) => d.sample(rng),
        })
    }
}

/// Draws `n` variates using a caller-supplied generator.
pub fn sample_with_rng<R: Rng + ?Sized>(
    params: &TweedieParams,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let variate = Variate::new(params)?;
    (0..n).map(|_| variate.draw(rng)).collect()
}

/// Draws `cfg.n` variates from `Tw_p(mu, phi)`.
pub fn sample(params: &TweedieParams, cfg: SamplerConfig) -> Result<Vec<f64>> {
    sample_with_rng(params, cfg.n, &mut cfg.rng())
}

/// `(c * sample(params), sample(scale_transform(params, c)))` with the same
/// configuration. The two vectors have the same distribution.
pub fn sample_scaled_pair(
    params: &TweedieParams,
    c: f64,
    cfg: SamplerConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let scaled_params = scale_transform(params, c)?;
    let mut scaled = sample(params, cfg)?;
    scaled.iter_mut().for_each(|x| *x *= c);
    let direct = sample(&scaled_params, cfg)?;
    Ok((scaled, direct))
}
