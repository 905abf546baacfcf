//! Series for the compound-Poisson base measure, `1 < p < 2`.
//!
//! For `x > 0` the density is a Poisson mixture of gamma densities. Pulling
//! out every factor that depends on the mean leaves
//!
//! ```text
//! g(x, phi) = exp(x^(2-p) / ((1-p)(2-p) phi)) / x * sum_{j>=1} W_j
//! log W_j   = j (a log x - (1+a) log phi - log(2-p) - a log(p-1))
//!             - log j! - log Gamma(j a),        a = (2-p)/(p-1)
//! ```
//!
//! `log W_j` is concave in `j` with its maximum near `x^(2-p) / (phi (2-p))`.
//! The sum is accumulated outward from that index in log space.

use crate::error::{Error, Result};

/// Terms below `TERM_CUTOFF * max term` end the summation in each direction.
pub(crate) const TERM_CUTOFF: f64 = 1e-17;
pub(crate) const MAX_TERMS: usize = 100_000;

/// Returns `(log g(x, phi), terms used)` for `x > 0`, `1 < p < 2`.
pub(crate) fn log_base_measure(x: f64, phi: f64, p: f64) -> Result<(f64, usize)> {
    debug_assert!(x > 0.0 && phi > 0.0 && p > 1.0 && p < 2.0);
    let alpha = (2.0 - p) / (p - 1.0);
    let log_x = x.ln();
    let per_index =
        alpha * log_x - (1.0 + alpha) * phi.ln() - (2.0 - p).ln() - alpha * (p - 1.0).ln();
    let log_w = |j: f64, log_j_fact: f64| j * per_index - log_j_fact - libm::lgamma(j * alpha);

    let peak = (x.powf(2.0 - p) / (phi * (2.0 - p))).round().max(1.0);
    let cutoff = TERM_CUTOFF.ln();

    let peak_fact = libm::lgamma(peak + 1.0);
    let log_w_peak = log_w(peak, peak_fact);
    let mut sum = 1.0;
    let mut terms = 1usize;

    // upward
    let mut j = peak;
    let mut fact = peak_fact;
    loop {
        j += 1.0;
        fact += j.ln();
        let rel = log_w(j, fact) - log_w_peak;
        sum += rel.exp();
        terms += 1;
        if rel < cutoff {
            break;
        }
        if terms >= MAX_TERMS {
            return Err(non_convergence(terms, log_w_peak, sum));
        }
    }

    // downward
    let mut j = peak;
    let mut fact = peak_fact;
    while j > 1.0 {
        fact -= j.ln();
        j -= 1.0;
        let rel = log_w(j, fact) - log_w_peak;
        sum += rel.exp();
        terms += 1;
        if rel < cutoff {
            break;
        }
        if terms >= MAX_TERMS {
            return Err(non_convergence(terms, log_w_peak, sum));
        }
    }

    let log_sum = log_w_peak + sum.ln();
    let log_g = log_sum - log_x + x.powf(2.0 - p) / ((1.0 - p) * (2.0 - p) * phi);
    Ok((log_g, terms))
}

fn non_convergence(terms: usize, log_w_peak: f64, sum: f64) -> Error {
    Error::SeriesNonConvergence {
        terms,
        partial_log_sum: log_w_peak + sum.ln(),
    }
}
