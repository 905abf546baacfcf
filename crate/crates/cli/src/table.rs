//! The correspondence between `p`, distributions and divergences, and the
//! alpha-divergence duality curves.

use serde::Serialize;
use tweedie_divergence::{alpha_divergence, alpha_dual_index, beta_divergence, PowerIndex, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub p: &'static str,
    /// Ratio `d_beta / d_alpha`.
    pub ratio: &'static str,
    pub distribution: &'static str,
    pub beta: &'static str,
    pub alpha: &'static str,
    pub entropy: &'static str,
}

pub const TABLE: [TableRow; 5] = [
    TableRow {
        p: "0",
        ratio: "μ",
        distribution: "Gaussian",
        beta: "EU",
        alpha: "Pearson (½χ²)",
        entropy: "L₂",
    },
    TableRow {
        p: "1",
        ratio: "1",
        distribution: "Poisson",
        beta: "KL",
        alpha: "KL",
        entropy: "Shannon",
    },
    TableRow {
        p: "3/2",
        ratio: "μ^(-1/2)",
        distribution: "Comp. Poisson",
        beta: "-",
        alpha: "Hellinger dist.",
        entropy: "-",
    },
    TableRow {
        p: "2",
        ratio: "μ^(-1)",
        distribution: "Gamma",
        beta: "IS",
        alpha: "Reversed KL",
        entropy: "Burg",
    },
    TableRow {
        p: "3",
        ratio: "μ^(-2)",
        distribution: "Inv. Gaussian",
        beta: "-",
        alpha: "Rev. Pearson",
        entropy: "-",
    },
];

/// One point of the curves `x -> d_alpha,p(x, mu)` and `x -> d_alpha,3-p(mu, x)`,
/// which coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub x: f64,
    pub mu: f64,
    pub alpha: f64,
    pub alpha_dual: f64,
    pub beta: f64,
}

pub fn duality_curves(
    powers: &[f64],
    mu: f64,
    x_min: f64,
    x_max: f64,
    points: usize,
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(powers.len() * points);
    for &p in powers {
        let power = PowerIndex::new(p)?;
        let dual = PowerIndex::new(alpha_dual_index(p))?;
        for i in 0..points {
            let t = if points > 1 {
                i as f64 / (points - 1) as f64
            } else {
                0.0
            };
            let x = x_min + t * (x_max - x_min);
            out.push(CurvePoint {
                p,
                x,
                mu,
                alpha: alpha_divergence(power, x, mu)?,
                alpha_dual: alpha_divergence(dual, mu, x)?,
                beta: beta_divergence(power, x, mu)?,
            });
        }
    }
    Ok(out)
}
