//! Exponential growth constants of classes and groups from sphere counts.

use serde::Serialize;

use super::{ConjugacyClass, Group};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct GrowthConstants {
    /// Envelope rate: `#(⟨h⟩ ∩ S_n) ≤ c_class·e^{k_class·n}` for all `n ≤ radius`.
    pub k_class: f64,
    pub c_class: f64,
    /// Least-squares slope of `log #(⟨h⟩ ∩ S_n)` over the nonempty spheres.
    pub k_class_fit: f64,
    pub k_group: f64,
    pub c_group: f64,
    pub k_group_fit: f64,
    /// Displacement-to-length comparison constants; the models identify the
    /// two, so both are 1.
    pub tau_class: f64,
    pub tau: f64,
    pub radius: usize,
    pub class_counts: Vec<u64>,
    pub group_counts: Vec<u64>,
}

/// Slope of the least-squares line through `(n, log c_n)` over `c_n > 0`.
pub(crate) fn log_slope(counts: &[u64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(n, &c)| (n as f64, (c as f64).ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Smallest `C` with `c_n ≤ C e^{K n}` for every listed `n`.
pub(crate) fn envelope_constant(counts: &[u64], k: f64) -> f64 {
    counts.iter().enumerate().map(|(n, &c)| c as f64 * (-k * n as f64).exp()).fold(0.0, f64::max)
}

pub fn growth_constants(group: &Group, class: &ConjugacyClass, radius: usize) -> Result<GrowthConstants> {
    let class_counts = class.sphere_counts(radius)?;
    if class_counts.iter().all(|&c| c == 0) {
        return Err(Error::NotFound(format!("{class:?} does not meet the ball of radius {radius}")));
    }
    let k_class_fit = log_slope(&class_counts);
    let k_class = k_class_fit.max(0.0);
    let c_class = envelope_constant(&class_counts, k_class);

    let ball = group.ball(radius)?;
    let group_counts: Vec<u64> = (0..=radius).map(|n| ball.sphere(n).len() as u64).collect();
    let k_group_fit = log_slope(&group_counts);
    // Polynomial growth (finite groups included) has exponential rate zero;
    // the finite-ball fit stays positive and is kept only as a diagnostic.
    let k_group = if group.has_polynomial_growth() { 0.0 } else { k_group_fit.max(0.0) };
    let c_group = envelope_constant(&group_counts, k_group);

    Ok(GrowthConstants {
        k_class,
        c_class,
        k_class_fit,
        k_group,
        c_group,
        k_group_fit,
        tau_class: 1.0,
        tau: 1.0,
        radius,
        class_counts,
        group_counts,
    })
}
