//! The Ovsyannikov series for `du/dt = (A + Z)u` with `A` generating a
//! diagonal semigroup: `u(t) = Σ_n W_n(t)` where
//! `W_0(τ) = S_A(τ−s)u_s` and `W_n(τ) = ∫_s^τ S_A(τ−r) Z W_{n−1}(r) dr`.
//!
//! Each `W_n` is computed on a uniform time grid by the trapezoid rule, with
//! the exponential factors applied exactly. A second run on every other node
//! gives a Richardson estimate of the quadrature error.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::generators::{CorrelationVector, OperatorHandle};
use crate::lattice::StateSpace;
use crate::math::{exp, ln, ln_factorial, sqrt, E};
use crate::ode::{dopri45, Tolerance};
use crate::scale::{
    horizon, localization_index, norm_alpha_unchecked, optimal_terminal, BoundModel, ScaleSpec,
    HORIZON_SCAN_POINTS,
};
use crate::{Error, Result};

/// Slack factor on majorant comparisons.
pub const MAJORANT_SLACK: f64 = 1e-6;
/// Agreement required between the two oracle paths (relative, sup-norm).
pub const ORACLE_AGREEMENT: f64 = 1e-9;
/// Local tolerance of the oracle's adaptive integrator.
pub const ORACLE_ODE_TOL: f64 = 1e-12;

/// Parameters of one series solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Target horizon `Υ < T(α_s, α*)`.
    pub upsilon: f64,
    /// Safety factor `q > 1` with `qΥ < min{T, T′}`.
    pub q: f64,
    /// Intermediate index `α ∈ (α_s, α*)` with `Υ < T(α_s, α) = T′`.
    pub alpha: f64,
    /// Nodes `G` of the output time grid; terms are computed on the nested
    /// grid of `2G − 1` nodes.
    pub grid_points: usize,
    pub n_max: usize,
    /// Stop once `max_τ ‖W_n(τ)‖_α < term_tol · ‖u_s‖_{α_s}`.
    pub term_tol: f64,
    /// Bound on the relative Richardson error estimate in `‖·‖_{α*}`.
    pub quad_tol: f64,
    /// Report `u_{2G−1} + (u_{2G−1} − u_G)/3` instead of the plain trapezoid
    /// values on the refined grid.
    pub extrapolate: bool,
}

/// `T = T(α_s, α*)` and `T′ = T(α_s, α)` for a validated config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonInfo {
    pub t_full: f64,
    pub t_prime: f64,
    pub q: f64,
    pub alpha: f64,
    pub upsilon: f64,
}

impl SeriesConfig {
    pub const DEFAULT_GRID_POINTS: usize = 33;
    pub const DEFAULT_N_MAX: usize = 80;
    pub const DEFAULT_TERM_TOL: f64 = 1e-10;
    pub const DEFAULT_QUAD_TOL: f64 = 1e-6;

    /// Picks `α` at the midpoint of the longest sub-interval of `(α_s, α*)` on
    /// which `T(α_s, ·) > Υ`, and `q = √(min{T, T′}/Υ)`.
    pub fn auto(scale: &ScaleSpec, bounds: &BoundModel, upsilon: f64) -> Result<Self> {
        let t_full = horizon(scale.alpha_s, scale.alpha_star, bounds, scale.nu);
        if !(upsilon > 0.0 && upsilon < t_full) {
            return Err(Error::HorizonExceeded { requested: upsilon, horizon: t_full });
        }
        let (a0, a1) = (scale.alpha_s, scale.alpha_star);
        let f = |b: f64| horizon(a0, b, bounds, scale.nu) - upsilon;
        let n = HORIZON_SCAN_POINTS;
        let grid = |i: usize| a0 + (a1 - a0) * i as f64 / n as f64;
        let mut best: Option<(usize, usize)> = None;
        let mut start: Option<usize> = None;
        for i in 0..=n {
            let inside = f(grid(i)) > 0.0;
            match (inside, start) {
                (true, None) => start = Some(i),
                (false, Some(j)) => {
                    if best.is_none_or(|(b0, b1)| i - 1 - j > b1 - b0) {
                        best = Some((j, i - 1));
                    }
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(j) = start {
            if best.is_none_or(|(b0, b1)| n - j > b1 - b0) {
                best = Some((j, n));
            }
        }
        let (i0, i1) = best.ok_or(Error::NoBracket { what: "interval with T(alpha_s, alpha) > Upsilon" })?;
        let lo = if i0 == 0 { a0 } else { bisect_sign(&f, grid(i0 - 1), grid(i0)) };
        let hi = if i1 == n { a1 } else { bisect_sign(&f, grid(i1 + 1), grid(i1)) };
        let alpha = 0.5 * (lo + hi);
        let t_prime = horizon(a0, alpha, bounds, scale.nu);
        let q = sqrt(t_full.min(t_prime) / upsilon);
        let cfg = SeriesConfig {
            upsilon,
            q,
            alpha,
            grid_points: Self::DEFAULT_GRID_POINTS,
            n_max: Self::DEFAULT_N_MAX,
            term_tol: Self::DEFAULT_TERM_TOL,
            quad_tol: Self::DEFAULT_QUAD_TOL,
            extrapolate: true,
        };
        cfg.validate(scale, bounds)?;
        Ok(cfg)
    }

    pub fn with_grid_points(mut self, grid_points: usize) -> Self {
        self.grid_points = grid_points;
        self
    }

    pub fn validate(&self, scale: &ScaleSpec, bounds: &BoundModel) -> Result<HorizonInfo> {
        let t_full = horizon(scale.alpha_s, scale.alpha_star, bounds, scale.nu);
        if !(self.alpha > scale.alpha_s && self.alpha < scale.alpha_star) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must lie strictly between alpha_s and alpha_star",
            });
        }
        let t_prime = horizon(scale.alpha_s, self.alpha, bounds, scale.nu);
        if !(self.upsilon > 0.0 && self.upsilon < t_full) {
            return Err(Error::HorizonExceeded { requested: self.upsilon, horizon: t_full });
        }
        if self.upsilon >= t_prime {
            return Err(Error::HorizonExceeded { requested: self.upsilon, horizon: t_prime });
        }
        if !(self.q > 1.0 && self.q * self.upsilon < t_full.min(t_prime)) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: "needs q > 1 and q * Upsilon < min(T, T')",
            });
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter { name: "grid_points", reason: "must be >= 2" });
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter { name: "n_max", reason: "must be >= 1" });
        }
        if !(self.term_tol > 0.0 && self.quad_tol > 0.0) {
            return Err(Error::InvalidParameter { name: "tolerances", reason: "must be positive" });
        }
        Ok(HorizonInfo { t_full, t_prime, q: self.q, alpha: self.alpha, upsilon: self.upsilon })
    }
}

fn bisect_sign<F: Fn(f64) -> f64>(f: &F, mut out: f64, mut inside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (out + inside);
        if mid == out || mid == inside {
            break;
        }
        if f(mid) > 0.0 {
            inside = mid;
        } else {
            out = mid;
        }
    }
    inside
}

/// Output of [`ovsyannikov_evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub s: f64,
    pub times: Vec<f64>,
    pub trajectory: Vec<CorrelationVector>,
    /// `max_τ ‖W_n(τ)‖_α` per computed term.
    pub term_norms: Vec<f64>,
    /// The majorant term `n` at the final time, times `‖u_s‖_{α_s}`.
    pub majorant_values: Vec<f64>,
    /// `(‖W_n(t)‖_α/‖u_s‖_{α_s})^{1/n}` at the final time, `n ≥ 1`.
    pub root_test: Vec<f64>,
    pub horizon: HorizonInfo,
    /// Relative Richardson estimate `max_τ ‖u_{2G−1} − u_G‖_{α*}/(3‖u_{2G−1}(τ)‖_{α*})`
    /// of the trapezoid error on the refined grid; the extrapolated output is
    /// more accurate than this.
    pub quad_error_estimate: f64,
    /// The tail cutoff was reached before `n_max`.
    pub converged: bool,
    pub initial_norm: f64,
    /// `Σ_n` majorant terms per unit `‖u_s‖_{α_s}` at the final time: a
    /// Lipschitz constant of `u_s ↦ u(t)` from `B_{α_s}` into `B_α`.
    pub majorant_sum: f64,
}

impl EvolutionResult {
    pub fn terms_used(&self) -> usize {
        self.term_norms.len()
    }

    pub fn final_state(&self) -> &CorrelationVector {
        self.trajectory.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }
}

/// `ν e^{ωτ}(qn/(eT′) + νN(α))^n τ^n/n!` per unit initial norm.
pub fn majorant_term(n: usize, tau: f64, scale: &ScaleSpec, bounds: &BoundModel, h: &HorizonInfo) -> f64 {
    let base = scale.nu * exp(scale.omega * tau);
    if n == 0 {
        return base;
    }
    if tau <= 0.0 {
        return 0.0;
    }
    let c = h.q * n as f64 / (E * h.t_prime) + scale.nu * bounds.n_at(h.alpha);
    base * exp(n as f64 * (ln(c) + ln(tau)) - ln_factorial(n))
}

/// The root-test bound `(qΥ/T′)(1 + eνT′N(α)/(qn))` for term `n ≥ 1`.
pub fn root_test_bound(n: usize, scale: &ScaleSpec, bounds: &BoundModel, h: &HorizonInfo) -> f64 {
    h.q * h.upsilon / h.t_prime * (1.0 + E * scale.nu * h.t_prime * bounds.n_at(h.alpha) / (h.q * n as f64))
}

/// Runs the trapezoid Duhamel recursion on `g` nodes of `[s, t]`; the
/// callback sees each term on all nodes and returns `false` to stop.
fn duhamel<F>(u_s: &[f64], diag: &[f64], z: &OperatorHandle<'_>, span: f64, g: usize, n_max: usize, mut on_term: F) -> Vec<f64>
where
    F: FnMut(usize, &[f64]) -> bool,
{
    let d = u_s.len();
    let step = span / (g - 1) as f64;
    let mut w = vec![0.0; g * d];
    for i in 0..g {
        let tau = step * i as f64;
        for k in 0..d {
            w[i * d + k] = exp(diag[k] * tau) * u_s[k];
        }
    }
    let mut sum = w.clone();
    if !on_term(0, &w) {
        return sum;
    }
    let decay: Vec<f64> = diag.iter().map(|&v| exp(v * step)).collect();
    let mut f = vec![0.0; g * d];
    let mut q = vec![0.0; d];
    for n in 1..=n_max {
        for i in 0..g {
            z.apply_into(&w[i * d..(i + 1) * d], &mut f[i * d..(i + 1) * d]);
        }
        for k in 0..d {
            q[k] = 0.5 * f[k];
            w[k] = 0.0;
        }
        for i in 1..g {
            for k in 0..d {
                let fi = f[i * d + k];
                q[k] = decay[k] * q[k] + fi;
                w[i * d + k] = step * (q[k] - 0.5 * fi);
            }
        }
        for (acc, v) in sum.iter_mut().zip(&w) {
            *acc += v;
        }
        if !on_term(n, &w) {
            break;
        }
    }
    sum
}

/// Solves `du/dt = (A + Z)u`, `u(s) = u_s`, on `[s, t]` by the series.
#[allow(clippy::too_many_arguments)]
pub fn ovsyannikov_evolve(
    u_s: &CorrelationVector,
    s: f64,
    t: f64,
    a: &OperatorHandle<'_>,
    z: &OperatorHandle<'_>,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    cfg: &SeriesConfig,
) -> Result<EvolutionResult> {
    let info = cfg.validate(scale, bounds)?;
    let space = a.space();
    u_s.check_space(space)?;
    if z.space() != space {
        return Err(Error::InvalidParameter { name: "z", reason: "operators act on different state spaces" });
    }
    let span = t - s;
    if !(span.is_finite() && span >= 0.0) {
        return Err(Error::InvalidParameter { name: "t", reason: "must satisfy t >= s" });
    }
    if span > cfg.upsilon {
        return Err(Error::HorizonExceeded { requested: span, horizon: cfg.upsilon });
    }
    // geometric ratio of the majorant series
    if cfg.q * span / info.t_prime >= 1.0 {
        return Err(Error::HorizonExceeded { requested: span, horizon: info.t_prime / cfg.q });
    }
    let diag = a.diagonal().ok_or(Error::InvalidParameter {
        name: "a",
        reason: "the semigroup part must be diagonal",
    })?;
    let d = space.dim();
    let init_norm = norm_alpha_unchecked(space, u_s.values(), scale.alpha_s);

    if span == 0.0 {
        return Ok(EvolutionResult {
            s,
            times: vec![s],
            trajectory: vec![u_s.clone()],
            term_norms: vec![norm_alpha_unchecked(space, u_s.values(), cfg.alpha)],
            majorant_values: vec![scale.nu * init_norm],
            root_test: Vec::new(),
            horizon: info,
            quad_error_estimate: 0.0,
            converged: true,
            initial_norm: init_norm,
            majorant_sum: scale.nu,
        });
    }

    // terms are built on the refined grid of 2G−1 nodes; the output grid of G
    // nodes carries the Richardson pair
    let g = cfg.grid_points;
    let gf = 2 * g - 1;
    let step = span / (gf - 1) as f64;
    let cutoff = cfg.term_tol * init_norm;
    let mut term_norms = Vec::new();
    let mut final_norms = Vec::new();
    let mut violation: Option<Error> = None;
    let mut converged = false;
    let fine = duhamel(u_s.values(), &diag, z, span, gf, cfg.n_max, |n, w| {
        let mut sup = 0.0f64;
        for i in 0..gf {
            let nv = norm_alpha_unchecked(space, &w[i * d..(i + 1) * d], cfg.alpha);
            sup = sup.max(nv);
            let maj = majorant_term(n, step * i as f64, scale, bounds, &info) * init_norm;
            if nv > (1.0 + MAJORANT_SLACK) * maj && violation.is_none() {
                violation = Some(Error::MajorantViolation { term: n, time: s + step * i as f64, norm: nv, majorant: maj });
            }
            if i == gf - 1 {
                final_norms.push(nv);
            }
        }
        term_norms.push(sup);
        if n >= 1 && sup < cutoff {
            converged = true;
            return false;
        }
        violation.is_none()
    });
    if let Some(e) = violation {
        return Err(e);
    }
    if init_norm == 0.0 {
        converged = true;
    }
    let used = term_norms.len() - 1;

    let coarse = duhamel(u_s.values(), &diag, z, span, g, used, |_, _| true);
    let mut quad = 0.0f64;
    let mut out = Vec::with_capacity(g * d);
    for i in 0..g {
        let a_fine = &fine[2 * i * d..(2 * i + 1) * d];
        let a_coarse = &coarse[i * d..(i + 1) * d];
        let diff: Vec<f64> = a_fine.iter().zip(a_coarse).map(|(x, y)| x - y).collect();
        let scale_norm = norm_alpha_unchecked(space, a_fine, scale.alpha_star);
        let dn = norm_alpha_unchecked(space, &diff, scale.alpha_star) / 3.0;
        if scale_norm > 0.0 {
            quad = quad.max(dn / scale_norm);
        } else if dn > 0.0 {
            quad = f64::INFINITY;
        }
        if cfg.extrapolate {
            out.extend(a_fine.iter().zip(&diff).map(|(x, e)| x + e / 3.0));
        } else {
            out.extend_from_slice(a_fine);
        }
    }
    if quad > cfg.quad_tol {
        return Err(Error::QuadratureNonConvergence { estimate: quad, tolerance: cfg.quad_tol });
    }

    let out_step = span / (g - 1) as f64;
    let times = (0..g).map(|i| if i == g - 1 { t } else { s + out_step * i as f64 }).collect();
    let trajectory = out
        .chunks_exact(d)
        .map(|c| CorrelationVector::from_values(space, c.to_vec()).expect("layout matches"))
        .collect();
    let majorant_values = (0..term_norms.len()).map(|n| majorant_term(n, span, scale, bounds, &info) * init_norm).collect();
    let root_test = final_norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, v)| if init_norm > 0.0 { libm::pow(v / init_norm, 1.0 / n as f64) } else { 0.0 })
        .collect();
    let unit_sum = (0..=used).map(|n| majorant_term(n, span, scale, bounds, &info)).sum();
    Ok(EvolutionResult {
        s,
        times,
        trajectory,
        term_norms,
        majorant_values,
        root_test,
        horizon: info,
        quad_error_estimate: quad,
        converged,
        initial_norm: init_norm,
        majorant_sum: unit_sum,
    })
}

/// Dense reference solution `e^{(t−s)(A+Z)}u_s` by two independent paths
/// (Padé matrix exponential and adaptive Dormand–Prince) that must agree.
pub fn oracle_evolve(u_s: &CorrelationVector, span: f64, a: &OperatorHandle<'_>, z: &OperatorHandle<'_>) -> Result<CorrelationVector> {
    let space = a.space();
    u_s.check_space(space)?;
    let generator = a.assemble_dense()?.add_scaled(1.0, &z.assemble_dense()?);
    oracle_dense(space, &generator, u_s, span)
}

pub fn oracle_dense(space: &StateSpace, generator: &DenseMatrix, u_s: &CorrelationVector, span: f64) -> Result<CorrelationVector> {
    if !(span.is_finite() && span >= 0.0) {
        return Err(Error::InvalidParameter { name: "t", reason: "must satisfy t >= s" });
    }
    if span == 0.0 {
        return Ok(u_s.clone());
    }
    let via_expm = generator.scaled(span).expm()?.matvec(u_s.values());
    let scale = u_s.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = Tolerance::new(ORACLE_ODE_TOL, ORACLE_ODE_TOL * scale.max(f64::MIN_POSITIVE));
    let via_ode = dopri45(
        |_, y, dy| {
            let r = generator.matvec(y);
            dy.copy_from_slice(&r);
        },
        0.0,
        u_s.values(),
        span,
        tol,
    )?;
    let size = via_expm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = via_expm.iter().zip(&via_ode).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let rel = if size > 0.0 { diff / size } else { diff };
    if rel > ORACLE_AGREEMENT {
        return Err(Error::OracleDisagreement { difference: rel, tolerance: ORACLE_AGREEMENT });
    }
    CorrelationVector::from_values(space, via_expm)
}

/// Composition `U(τ,t)U(s,τ)u_s` against the direct `U(s,t)u_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    /// `α(τ, s, α_s)`, the starting index of the second leg.
    pub alpha_tau: f64,
    /// `‖direct − composed‖_{α*}`.
    pub difference: f64,
    /// `difference / ‖direct‖_{α*}`.
    pub relative: f64,
    /// Sum of the runs' relative Richardson estimates.
    pub budget: f64,
}

/// Checks the flow property for `s < τ < t`. The second leg starts in
/// `B_{α(τ,s,α_s)}` with a config chosen by [`SeriesConfig::auto`] for the
/// remaining span; each leg uses `cfg.grid_points` nodes.
#[allow(clippy::too_many_arguments)]
pub fn flow_compose_check(
    u_s: &CorrelationVector,
    s: f64,
    tau: f64,
    t: f64,
    a: &OperatorHandle<'_>,
    z: &OperatorHandle<'_>,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    cfg: &SeriesConfig,
) -> Result<FlowReport> {
    if !(s <= tau && tau <= t) {
        return Err(Error::InvalidParameter { name: "tau", reason: "needs s <= tau <= t" });
    }
    let t_full = horizon(scale.alpha_s, scale.alpha_star, bounds, scale.nu);
    let alpha_tau = localization_index(tau, s, scale.alpha_s, bounds, scale.nu, scale.alpha_star)?;
    let second = if alpha_tau < scale.alpha_star { horizon(alpha_tau, scale.alpha_star, bounds, scale.nu) } else { 0.0 };
    let limit = (tau + second).min(s + t_full);
    if t >= limit {
        return Err(Error::HorizonExceeded { requested: t - s, horizon: limit - s });
    }
    let direct = ovsyannikov_evolve(u_s, s, t, a, z, scale, bounds, cfg)?;
    let mut budget = direct.quad_error_estimate;
    let mid = if tau > s {
        let r = ovsyannikov_evolve(u_s, s, tau, a, z, scale, bounds, cfg)?;
        budget += r.quad_error_estimate;
        r.final_state().clone()
    } else {
        u_s.clone()
    };
    let composed = if t > tau {
        let scale2 = ScaleSpec::with_constants(alpha_tau, scale.alpha_star, scale.nu, scale.omega)?;
        let mut cfg2 = SeriesConfig::auto(&scale2, bounds, (t - tau) * (1.0 + 1e-9))?;
        cfg2.grid_points = cfg.grid_points;
        cfg2.n_max = cfg.n_max;
        cfg2.term_tol = cfg.term_tol;
        cfg2.quad_tol = cfg.quad_tol;
        let r = ovsyannikov_evolve(&mid, tau, t, a, z, &scale2, bounds, &cfg2)?;
        budget += r.quad_error_estimate;
        r.final_state().clone()
    } else {
        mid
    };
    let space = a.space();
    let diff = direct.final_state().difference(&composed);
    let difference = norm_alpha_unchecked(space, diff.values(), scale.alpha_star);
    let size = norm_alpha_unchecked(space, direct.final_state().values(), scale.alpha_star);
    let relative = if size > 0.0 { difference / size } else { difference };
    Ok(FlowReport { alpha_tau, difference, relative, budget })
}

/// The a-priori estimate `‖u(t)‖_α ≤ C/(T′−qΥ) e^{ω(t−s)} ‖u_s‖_{α_s}` with
/// `C = ν e^{eνT_*N_* − 1} T_*` along a computed trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriReport {
    pub c: f64,
    pub t_star: f64,
    pub n_star: f64,
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
    /// Indices into the trajectory where the estimate fails.
    pub violations: Vec<usize>,
    /// `ν e^{ω(t−s)}(1 + e^{eνT_*N_*−1} qΥ/(T′−qΥ)) ‖u_s‖_{α_s}`: the same
    /// chain of inequalities with the `n = 0` term of the majorant kept at 1
    /// (`n! ≥ e(n/e)^n` fails there). The plain bound drops below `ν` once
    /// `C < T′ − qΥ`, and then cannot hold at `t = s`.
    pub corrected_bounds: Vec<f64>,
    pub corrected_violations: Vec<usize>,
}

impl AprioriReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn corrected_passed(&self) -> bool {
        self.corrected_violations.is_empty()
    }
}

pub fn apriori_estimate_check(result: &EvolutionResult, space: &StateSpace, scale: &ScaleSpec, bounds: &BoundModel, cfg: &SeriesConfig) -> Result<AprioriReport> {
    let info = cfg.validate(scale, bounds)?;
    let n = HORIZON_SCAN_POINTS;
    let n_star = (0..=n)
        .map(|i| bounds.n_at(scale.alpha_s + (scale.alpha_star - scale.alpha_s) * i as f64 / n as f64))
        .fold(0.0f64, f64::max);
    let t_star = optimal_terminal(scale.alpha_s, bounds, scale.nu, scale.alpha_star)?.t_max;
    let nu = scale.nu;
    let c = nu * exp(E * nu * t_star * n_star - 1.0) * t_star;
    let denom = info.t_prime - cfg.q * cfg.upsilon;
    let mut norms = Vec::with_capacity(result.times.len());
    let mut bound_values = Vec::with_capacity(result.times.len());
    let mut violations = Vec::new();
    let tail = exp(E * nu * t_star * n_star - 1.0) * cfg.q * cfg.upsilon / denom;
    let mut corrected_bounds = Vec::with_capacity(result.times.len());
    let mut corrected_violations = Vec::new();
    for (i, (time, state)) in result.times.iter().zip(&result.trajectory).enumerate() {
        let nv = norm_alpha_unchecked(space, state.values(), cfg.alpha);
        let growth = exp(scale.omega * (time - result.s)) * result.initial_norm;
        let b = c / denom * growth;
        let bc = nu * (1.0 + tail) * growth;
        if nv > b {
            violations.push(i);
        }
        if nv > bc {
            corrected_violations.push(i);
        }
        norms.push(nv);
        bound_values.push(b);
        corrected_bounds.push(bc);
    }
    Ok(AprioriReport { c, t_star, n_star, norms, bounds: bound_values, violations, corrected_bounds, corrected_violations })
}
