//! Alpha and beta divergences as the divergences generated by the Tweedie
//! dual cumulant, Tweedie densities written in beta-divergence form, and
//! maximum-likelihood selection of the power index.
//!
//! A power variance function `v(mu) = mu^p` fixes a Tweedie model. Its dual
//! cumulant generates the beta divergence as a Bregman divergence and the
//! alpha divergence as a Csiszár f-divergence, so minimizing a beta divergence
//! is maximum likelihood under the matching Tweedie model.
//!
//! ```
//! use tweedie_divergence::{alpha_divergence, beta_divergence, PowerIndex};
//!
//! let kl = PowerIndex::POISSON;
//! let d = beta_divergence(kl, 2.0, 1.0).unwrap();
//! assert!((d - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
//!
//! // Hellinger is symmetric
//! let h = PowerIndex::HELLINGER;
//! assert_eq!(alpha_divergence(h, 4.0, 1.0).unwrap(), alpha_divergence(h, 1.0, 4.0).unwrap());
//! ```
//!
//! The `book/` directory next to the workspace root walks through the same
//! material with runnable examples.

pub mod divergence;
pub mod error;
pub mod estimation;
pub mod model;
pub mod power;
pub mod sampling;

mod optimize;
mod series;

pub use divergence::{
    alpha_divergence, beta_divergence, beta_divergence_grad_mu, beta_from_alpha, bregman,
    dual_cumulant, dual_cumulant_derivative, f_divergence, ConvexFunction, CsiszarDual,
    DualCumulant, FnConvex, IntegrationConstants, Tilted,
};
pub use error::{Error, Result};
pub use estimation::{
    deviance_profile, fit, fit_mu, log_likelihood, profile_at, total_deviance, Dataset, FitOptions,
    FitResult, ProfilePoint, ProfileRow,
};
pub use model::{
    canonical_pair, cumulant, cumulant_at_mu, log_base_measure, log_density, mu_of_theta,
    scale_transform, theta_of_mu, unit_deviance, variance_function, CanonicalPair, DensityEval,
    DensityMethod, TweedieParams,
};
pub use power::{alpha_dual_index, p_from_q, q_from_p, ModelClass, PowerIndex};
pub use sampling::{sample, sample_scaled_pair, sample_with_rng, SamplerConfig};

// The guide's code listings run as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/divergences.md")]
    mod divergences {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/tweedie-models.md")]
    mod tweedie_models {}
    #[doc = include_str!("../../../book/src/densities.md")]
    mod densities {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
