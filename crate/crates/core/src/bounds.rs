//! Sampled check of the singular operator-norm estimate
//! `‖Zu‖_{α″} ≤ (M(α*)/(α″−α′) + N(α*))‖u‖_{α′}`.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::generators::OperatorHandle;
use crate::lattice::StateSpace;
use crate::math::powi;
use crate::scale::{norm_alpha_unchecked, BoundModel, ScaleSpec};
use crate::{Error, Result};

/// Added to the largest observed regular part when freezing `N̂`.
pub const N_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub ratio: f64,
    pub bound: f64,
}

impl BoundSample {
    pub fn pole(&self) -> f64 {
        1.0 / (self.alpha_hi - self.alpha_lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularBoundReport {
    pub samples: Vec<BoundSample>,
    pub violations: Vec<BoundSample>,
    /// `max ratio/bound`; below 1 means every sample respects the bound.
    pub max_utilization: f64,
    /// `min (bound − ratio)`.
    pub min_slack: f64,
    /// Least-squares fit `ratio ≈ M̂/(α″−α′) + N̂`.
    pub fitted_m: f64,
    pub fitted_n: f64,
    /// `max (ratio − M(α*)/(α″−α′))`: the smallest constant `N` that would
    /// cover every sample given the model `M`.
    pub minimal_n: f64,
}

impl SingularBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// `N̂` to freeze into later runs: the minimal covering constant, never
    /// below zero, plus [`N_FLOOR`].
    pub fn frozen_n(&self) -> f64 {
        self.minimal_n.max(0.0) + N_FLOOR
    }
}

/// Random `u` with `|u(η)| ∈ [½, 1]·α′^{|η|}`, random signs.
pub fn sample_scaled<R: Rng + ?Sized>(space: &StateSpace, alpha: f64, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; space.dim()];
    for n in 0..=space.n_max() {
        let w = powi(alpha, n as i32);
        for v in &mut out[space.layer(n)] {
            let mag: f64 = rng.gen_range(0.5..=1.0);
            *v = if rng.gen::<bool>() { mag * w } else { -mag * w };
        }
    }
    out
}

/// Samples `α′ ∈ (α_under, α*)`, `α″ ∈ (α′, α*]` and `u`, evaluating
/// `‖Zu‖_{α″}/‖u‖_{α′}` against the bound built from `M(α*), N(α*)`.
pub fn verify_singular_bound<R: Rng + ?Sized>(
    z: &OperatorHandle<'_>,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    samples: usize,
    rng: &mut R,
) -> Result<SingularBoundReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter { name: "samples", reason: "must be >= 1" });
    }
    let sp = z.space();
    let a_star = scale.alpha_star;
    let m_star = bounds.m_at(a_star);
    let n_star = bounds.n_at(a_star);
    let mut out = vec![0.0; sp.dim()];
    let mut records = Vec::with_capacity(samples);
    for _ in 0..samples {
        let lo = rng.gen_range(scale.alpha_under..a_star);
        let mut hi = rng.gen_range(lo..=a_star);
        if hi <= lo {
            hi = a_star;
        }
        let u = sample_scaled(sp, lo, rng);
        z.apply_into(&u, &mut out);
        let nu = norm_alpha_unchecked(sp, &u, lo);
        let ratio = if nu > 0.0 { norm_alpha_unchecked(sp, &out, hi) / nu } else { 0.0 };
        let bound = m_star / (hi - lo) + n_star;
        records.push(BoundSample { alpha_lo: lo, alpha_hi: hi, ratio, bound });
    }
    Ok(summarize(records, m_star))
}

fn summarize(samples: Vec<BoundSample>, m_star: f64) -> SingularBoundReport {
    let violations: Vec<_> = samples.iter().copied().filter(|s| s.ratio > s.bound).collect();
    let max_utilization = samples.iter().map(|s| s.ratio / s.bound).fold(0.0, f64::max);
    let min_slack = samples.iter().map(|s| s.bound - s.ratio).fold(f64::INFINITY, f64::min);
    let minimal_n =
        samples.iter().map(|s| s.ratio - m_star * s.pole()).fold(f64::NEG_INFINITY, f64::max);
    let (fitted_m, fitted_n) = fit_line(samples.iter().map(|s| (s.pole(), s.ratio)));
    SingularBoundReport { samples, violations, max_utilization, min_slack, fitted_m, fitted_n, minimal_n }
}

/// Ordinary least squares `y ≈ a x + b`.
pub(crate) fn fit_line<I: Iterator<Item = (f64, f64)>>(points: I) -> (f64, f64) {
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if n == 0.0 || det.abs() <= f64::EPSILON * n * sxx {
        return (0.0, if n > 0.0 { sy / n } else { 0.0 });
    }
    let a = (n * sxy - sx * sy) / det;
    (a, (sy - a * sx) / n)
}
