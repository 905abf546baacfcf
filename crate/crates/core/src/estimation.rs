//! Maximum-likelihood estimation of `(mu, phi, p)`.
//!
//! The mean estimate is the sample mean for every power index, because the
//! summed beta-divergence gradient `-sum (x_i - mu) / mu^p` vanishes exactly
//! there. The dispersion is profiled out by a one-dimensional search in
//! `log phi`, and the power index is chosen by maximizing the resulting
//! profile likelihood: a coarse grid followed by Brent refinement inside each
//! continuous segment of feasible indices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{beta_divergence, beta_divergence_grad_mu};
use crate::error::{finite, Error, Result};
use crate::model::{log_density, DensityMethod, TweedieParams};
use crate::optimize::{bracket_minimum, brent_minimize};
use crate::power::{ModelClass, PowerIndex};

/// Below this many observations the likelihood is summed on one thread.
const PARALLEL_MIN: usize = 2048;

/// Observations, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            finite("observation", v)?;
        }
        Ok(Dataset { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }

    /// Why the data cannot come from a model with index `p`, if it cannot.
    pub fn infeasibility(&self, p: PowerIndex) -> Option<&'static str> {
        let class = p.class();
        let v = &self.values;
        let reason = match class {
            ModelClass::NoModel => Some("no model exists for 0 < p < 1"),
            ModelClass::Gaussian => None,
            ModelClass::Poisson if !v.iter().all(|x| *x >= 0.0 && x.fract() == 0.0) => {
                Some("p = 1 requires nonnegative integer data")
            }
            ModelClass::Poisson | ModelClass::CompoundPoisson if v.iter().any(|x| *x < 0.0) => {
                Some("1 <= p < 2 requires nonnegative data")
            }
            ModelClass::Poisson | ModelClass::CompoundPoisson => None,
            _ if v.iter().any(|x| *x <= 0.0) => Some("this p requires strictly positive data"),
            _ => None,
        };
        reason.or_else(|| match self.mean() {
            None => Some("the dataset is empty"),
            Some(m) if class != ModelClass::Gaussian && m <= 0.0 => {
                Some("the sample mean must be positive")
            }
            _ => None,
        })
    }

    pub fn supports(&self, p: PowerIndex) -> bool {
        self.infeasibility(p).is_none()
    }

    fn require(&self, p: PowerIndex) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyData);
        }
        match self.infeasibility(p) {
            None => Ok(()),
            Some(reason) => Err(Error::InvalidArgument(format!("p = {p}: {reason}"))),
        }
    }
}

/// Minimizer of `sum_i d_beta(x_i, mu)` over `mu`, i.e. the sample mean.
pub fn fit_mu(p: PowerIndex, data: &Dataset) -> Result<f64> {
    data.require(p)?;
    let n = data.len() as f64;
    let mean = data.values.iter().sum::<f64>() / n;
    if cfg!(debug_assertions) {
        let grad: f64 = data
            .values
            .iter()
            .map(|&x| beta_divergence_grad_mu(p, x, mean))
            .sum::<Result<f64>>()?;
        let scale: f64 = data
            .values
            .iter()
            .map(|&x| beta_divergence_grad_mu(p, x, mean).map(f64::abs))
            .sum::<Result<f64>>()?;
        debug_assert!(grad.abs() <= 1e-9 * scale.max(1e-300));
    }
    Ok(mean)
}

fn map_values<T, F>(data: &Dataset, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    if data.len() < PARALLEL_MIN {
        data.values.iter().map(|&x| f(x)).collect()
    } else {
        data.values.par_iter().map(|&x| f(x)).collect()
    }
}

fn likelihood_with(
    params: &TweedieParams,
    data: &Dataset,
    method: Option<DensityMethod>,
) -> Result<f64> {
    // collect then sum in order so the result does not depend on thread count
    let terms = map_values(data, |x| {
        log_density(params, x, method).map(|e| e.log_density)
    })?;
    Ok(terms.iter().sum())
}

/// `sum_i log f(x_i)`, mixing point masses and densities for `1 < p < 2`.
pub fn log_likelihood(params: &TweedieParams, data: &Dataset) -> Result<f64> {
    likelihood_with(params, data, None)
}

/// `sum_i 2 d_beta(x_i, mu)`.
pub fn total_deviance(p: PowerIndex, data: &Dataset, mu: f64) -> Result<f64> {
    let terms = map_values(data, |x| beta_divergence(p, x, mu))?;
    Ok(2.0 * terms.iter().sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Lower end of the searched power range; `None` with `p_max = None`
    /// selects the default candidate set.
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub grid_step: f64,
    /// Target accuracy of the refined power index.
    pub p_tolerance: f64,
    /// Absolute accuracy of `log phi`.
    pub log_phi_tolerance: f64,
    /// Log-likelihood differences below this are ties.
    pub ll_tolerance: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            p_min: None,
            p_max: None,
            grid_step: 0.1,
            p_tolerance: 1e-3,
            log_phi_tolerance: 1e-8,
            ll_tolerance: 1e-8,
            max_iter: 200,
        }
    }
}

impl FitOptions {
    pub fn fixed_p(p: f64) -> Self {
        FitOptions {
            p_min: Some(p),
            p_max: Some(p),
            ..FitOptions::default()
        }
    }
}

pub(crate) const LOG_PHI_MIN: f64 = -13.815510557964274; // ln 1e-6
pub(crate) const LOG_PHI_MAX: f64 = 13.815510557964274;

/// Profile likelihood at one power index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub p: f64,
    pub mu_hat: f64,
    pub phi_hat: f64,
    pub log_likelihood: f64,
    pub total_deviance: f64,
    pub method: DensityMethod,
    pub converged: bool,
}

/// Maximizes the likelihood over `(mu, phi)` at a fixed `p`.
pub fn profile_at(p: PowerIndex, data: &Dataset, opts: &FitOptions) -> Result<ProfilePoint> {
    let mu = fit_mu(p, data)?;
    let deviance = total_deviance(p, data, mu)?;
    let n = data.len() as f64;
    let method = DensityMethod::default_for(p);

    let (phi, converged) = match (p.class(), method) {
        (ModelClass::Poisson, _) => (1.0, true),
        // log g does not depend on phi beyond -log(phi)/2: mean deviance is the MLE
        (_, DensityMethod::Saddlepoint)
        | (ModelClass::Gaussian, _)
        | (ModelClass::InverseGaussian, _) => {
            let phi = (deviance / n).clamp(LOG_PHI_MIN.exp(), LOG_PHI_MAX.exp());
            (phi, deviance > 0.0)
        }
        _ => {
            let mut neg_ll = |log_phi: f64| {
                TweedieParams::new(mu, log_phi.exp(), p)
                    .and_then(|prm| likelihood_with(&prm, data, Some(method)))
                    .map_or(f64::INFINITY, |ll| -ll)
            };
            let start = if deviance > 0.0 {
                (deviance / n).ln()
            } else {
                0.0
            };
            let (lo, hi) = bracket_minimum(&mut neg_ll, start, 0.25, LOG_PHI_MIN, LOG_PHI_MAX);
            let m = brent_minimize(&mut neg_ll, lo, hi, opts.log_phi_tolerance, opts.max_iter);
            let interior = m.x > LOG_PHI_MIN + 1e-6 && m.x < LOG_PHI_MAX - 1e-6;
            (m.x.exp(), m.converged && interior && m.fx.is_finite())
        }
    };

    let params = TweedieParams::new(mu, phi, p)?;
    let ll = likelihood_with(&params, data, Some(method))?;
    Ok(ProfilePoint {
        p: p.value(),
        mu_hat: mu,
        phi_hat: phi,
        log_likelihood: ll,
        total_deviance: deviance,
        method,
        converged,
    })
}

/// The fitted model and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mu_hat: f64,
    pub phi_hat: f64,
    pub p_hat: f64,
    pub log_likelihood: f64,
    pub total_deviance: f64,
    /// Mean-deviance estimate `total_deviance / n` of the dispersion; a diagnostic only.
    pub mean_deviance_phi: f64,
    pub density_method: DensityMethod,
    /// Number of profile-likelihood evaluations.
    pub iterations: usize,
    pub converged: bool,
    pub p_feasible_interval: (f64, f64),
    /// Every profile evaluation, sorted by `p`.
    pub profile: Vec<ProfilePoint>,
}

/// Candidate indices grouped into segments over which the likelihood is
/// continuous in `p`. Singletons are compared by value only.
fn candidate_segments(opts: &FitOptions) -> Result<Vec<Vec<f64>>> {
    const SPECIAL: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
    let step = opts.grid_step;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be > 0, got {step}"
        )));
    }
    let (lo, hi) = match (opts.p_min, opts.p_max) {
        (None, None) => {
            let mut segments: Vec<Vec<f64>> = SPECIAL.iter().map(|&p| vec![p]).collect();
            segments.push(grid(1.05, 1.95, step));
            return Ok(segments);
        }
        (lo, hi) => (lo.unwrap_or(0.0), hi.unwrap_or(3.0)),
    };
    finite("p_min", lo)?;
    finite("p_max", hi)?;
    if lo > hi {
        return Err(Error::InvalidArgument(format!(
            "p_min = {lo} exceeds p_max = {hi}"
        )));
    }

    let region = |p: f64| -> Option<u8> {
        match ModelClass::of(p) {
            ModelClass::NoModel => None,
            ModelClass::CompoundPoisson => Some(1),
            ModelClass::OtherValid if p < 0.0 => Some(0),
            ModelClass::OtherValid if p < 3.0 => Some(2),
            ModelClass::OtherValid => Some(3),
            _ => None, // special points handled separately
        }
    };

    let mut segments: Vec<Vec<f64>> = SPECIAL
        .iter()
        .filter(|&&p| p >= lo && p <= hi)
        .map(|&p| vec![p])
        .collect();
    let mut current: Vec<f64> = Vec::new();
    let mut current_region = None;
    for p in grid(lo, hi, step) {
        let r = region(p);
        if r != current_region || r.is_none() {
            if !current.is_empty() {
                segments.push(std::mem::take(&mut current));
            }
            current_region = r;
        }
        if r.is_some() {
            current.push(p);
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    Ok(segments)
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut points: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if hi - points[points.len() - 1] > 1e-9 * step.max(1.0) {
        points.push(hi);
    }
    points
}

/// Fits `(mu, phi, p)` by maximizing the profile likelihood over `p`.
///
/// Without `p_min`/`p_max` the candidates are `{0, 1, 2, 3}` plus a grid on
/// `[1.05, 1.95]`, each kept only if the data are in the model's support.
/// Ties are resolved toward the smaller `p`.
pub fn fit(data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let segments = candidate_segments(opts)?;
    let mut evaluated: Vec<ProfilePoint> = Vec::new();
    let mut outer_converged = true;

    for segment in &segments {
        let feasible: Vec<f64> = segment
            .iter()
            .copied()
            .filter(|&p| {
                PowerIndex::new(p)
                    .map(|p| data.supports(p))
                    .unwrap_or(false)
            })
            .collect();
        if feasible.is_empty() {
            continue;
        }
        let mut points = Vec::with_capacity(feasible.len());
        for &p in &feasible {
            points.push(profile_at(PowerIndex::new(p)?, data, opts)?);
        }
        if points.len() >= 2 {
            let best = argmax(&points);
            let lo = points[best.saturating_sub(1)].p;
            let hi = points[(best + 1).min(points.len() - 1)].p;
            let mut refined: Vec<ProfilePoint> = Vec::new();
            let mut failure = None;
            let m = brent_minimize(
                |p| match PowerIndex::new(p).and_then(|p| profile_at(p, data, opts)) {
                    Ok(pt) => {
                        let v = -pt.log_likelihood;
                        refined.push(pt);
                        v
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                opts.p_tolerance,
                opts.max_iter,
            );
            outer_converged &= m.converged && failure.is_none();
            points.extend(refined);
        }
        evaluated.extend(points);
    }

    if evaluated.is_empty() {
        return Err(Error::NoFeasiblePower);
    }
    evaluated.sort_by(|a, b| a.p.total_cmp(&b.p));
    evaluated.dedup_by(|a, b| a.p == b.p);

    let mut best = 0;
    for (i, pt) in evaluated.iter().enumerate() {
        if pt.log_likelihood > evaluated[best].log_likelihood + opts.ll_tolerance {
            best = i;
        }
    }
    let chosen = evaluated[best].clone();
    let interval = (evaluated[0].p, evaluated[evaluated.len() - 1].p);
    let converged = outer_converged && chosen.converged;
    let n = data.len() as f64;

    Ok(FitResult {
        mu_hat: chosen.mu_hat,
        phi_hat: chosen.phi_hat,
        p_hat: chosen.p,
        log_likelihood: chosen.log_likelihood,
        total_deviance: chosen.total_deviance,
        mean_deviance_phi: chosen.total_deviance / n,
        density_method: chosen.method,
        iterations: evaluated.len(),
        converged,
        p_feasible_interval: interval,
        profile: evaluated,
    })
}

fn argmax(points: &[ProfilePoint]) -> usize {
    let mut best = 0;
    for (i, pt) in points.iter().enumerate() {
        if pt.log_likelihood > points[best].log_likelihood {
            best = i;
        }
    }
    best
}

/// One row of a deviance/likelihood profile over `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub p: f64,
    pub feasible: bool,
    pub total_deviance: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub phi_hat: Option<f64>,
    pub method: Option<DensityMethod>,
    /// Why the row is infeasible or failed.
    pub note: Option<String>,
}

/// Tabulates total deviance and profile log-likelihood at each `p`.
///
/// Infeasible or failing entries are marked in the row, never fatal.
pub fn deviance_profile(data: &Dataset, p_values: &[f64], opts: &FitOptions) -> Vec<ProfileRow> {
    p_values
        .iter()
        .map(|&p| {
            let blank = |note: String| ProfileRow {
                p,
                feasible: false,
                total_deviance: None,
                log_likelihood: None,
                phi_hat: None,
                method: None,
                note: Some(note),
            };
            let power = match PowerIndex::new(p) {
                Ok(power) => power,
                Err(e) => return blank(e.to_string()),
            };
            if data.is_empty() {
                return blank(Error::EmptyData.to_string());
            }
            if let Some(reason) = data.infeasibility(power) {
                return blank(reason.to_string());
            }
            match profile_at(power, data, opts) {
                Ok(pt) => ProfileRow {
                    p,
                    feasible: true,
                    total_deviance: Some(pt.total_deviance),
                    log_likelihood: Some(pt.log_likelihood),
                    phi_hat: Some(pt.phi_hat),
                    method: Some(pt.method),
                    note: (!pt.converged).then(|| "dispersion search did not converge".to_string()),
                },
                Err(e) => ProfileRow {
                    feasible: true,
                    ..blank(e.to_string())
                },
            }
        })
        .collect()
}
