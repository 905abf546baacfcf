use thiserror::Error;

use crate::model::DensityMethod;

/// Errors produced by divergence, density, sampling and fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside the domain: {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("no Tweedie model exists for power index p = {0} (0 < p < 1)")]
    NoModel(f64),

    #[error("density method {method:?} is not available for p = {p}")]
    UnsupportedMethod { p: f64, method: DensityMethod },

    #[error("x = {x} is outside the support of the model with p = {p}")]
    OutsideSupport { p: f64, x: f64 },

    /// The compound-Poisson series did not reach its truncation criterion.
    /// `partial_log_sum` is the log of the partial base-measure sum.
    #[error(
        "density series did not converge after {terms} terms (partial log-sum {partial_log_sum})"
    )]
    SeriesNonConvergence { terms: usize, partial_log_sum: f64 },

    #[error("sampling is not supported for p = {0}")]
    UnsupportedSampler(f64),

    #[error("the dataset is empty")]
    EmptyData,

    #[error("no candidate power index is feasible for the data")]
    NoFeasiblePower,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement: "must be > 0",
        })
    }
}
