//! Weighted sup-norms over the scale `K_α` and the time-horizon calculus.

use crate::generators::CorrelationVector;
use crate::lattice::{KernelPair, StateSpace};
use crate::math::{exp, powi, E};
use crate::{Error, Result};

/// Grid size of the unimodality scan in [`optimal_terminal`].
pub const HORIZON_SCAN_POINTS: usize = 1000;

/// Scale parameters: `1 = α_under < α_s < α*`, semigroup constants `ν, ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSpec {
    pub alpha_under: f64,
    pub alpha_s: f64,
    pub alpha_star: f64,
    pub nu: f64,
    pub omega: f64,
}

impl ScaleSpec {
    /// `ν = 1, ω = 0`: the constants of the contraction semigroup `e^{−tE^a}`.
    pub fn new(alpha_s: f64, alpha_star: f64) -> Result<Self> {
        ScaleSpec::with_constants(alpha_s, alpha_star, 1.0, 0.0)
    }

    pub fn with_constants(alpha_s: f64, alpha_star: f64, nu: f64, omega: f64) -> Result<Self> {
        if !(alpha_s.is_finite() && alpha_s > 1.0) {
            return Err(Error::InvalidParameter { name: "alpha_s", reason: "must exceed 1" });
        }
        if !(alpha_star.is_finite() && alpha_star > alpha_s) {
            return Err(Error::InvalidParameter {
                name: "alpha_star",
                reason: "must exceed alpha_s",
            });
        }
        if !(nu.is_finite() && nu >= 1.0) {
            return Err(Error::InvalidParameter { name: "nu", reason: "must be >= 1" });
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParameter { name: "omega", reason: "must be finite" });
        }
        Ok(ScaleSpec { alpha_under: 1.0, alpha_s, alpha_star, nu, omega })
    }
}

/// A positive nondecreasing coefficient function of the scale index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFn {
    Constant(f64),
    /// `slope · β`.
    Linear { slope: f64 },
    /// `(1/e)(⟨a⟩β² + βm e^{⟨φ⟩β} + βλ)`.
    BirthDeath { avg_a: f64, m: f64, avg_phi: f64, lambda: f64 },
}

impl BoundFn {
    pub fn eval(&self, beta: f64) -> f64 {
        match *self {
            BoundFn::Constant(c) => c,
            BoundFn::Linear { slope } => slope * beta,
            BoundFn::BirthDeath { avg_a, m, avg_phi, lambda } => {
                (avg_a * beta * beta + beta * m * exp(avg_phi * beta) + beta * lambda) / E
            }
        }
    }
}

/// The coefficients `M(·)` (singular) and `N(·)` (regular) of the
/// operator-norm estimate `‖Zu‖_{α″} ≤ (M(α*)/(α″−α′) + N(α*))‖u‖_{α′}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundModel {
    pub m: BoundFn,
    pub n: BoundFn,
}

impl BoundModel {
    /// The birth-and-death `M` built from kernel integrals and rates, with a
    /// constant `N`.
    pub fn birth_death(kernels: &KernelPair, m: f64, lambda: f64, n_const: f64) -> Self {
        BoundModel {
            m: BoundFn::BirthDeath {
                avg_a: kernels.avg_a(),
                m,
                avg_phi: kernels.avg_phi(),
                lambda,
            },
            n: BoundFn::Constant(n_const),
        }
    }

    pub fn m_at(&self, beta: f64) -> f64 {
        self.m.eval(beta)
    }

    pub fn n_at(&self, beta: f64) -> f64 {
        self.n.eval(beta)
    }

    /// Checks positivity and monotonicity of `M` and `N` on a grid of `[lo, hi]`.
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<()> {
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..=200 {
            let b = lo + (hi - lo) * i as f64 / 200.0;
            let (m, n) = (self.m_at(b), self.n_at(b));
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter { name: "M", reason: "must be positive and finite" });
            }
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::InvalidParameter { name: "N", reason: "must be nonnegative and finite" });
            }
            if m < prev.0 || n < prev.1 {
                return Err(Error::InvalidParameter { name: "bound model", reason: "must be nondecreasing" });
            }
            prev = (m, n);
        }
        Ok(())
    }
}

/// `‖k‖_α = max_η |k(η)| α^{−|η|}`.
pub fn norm_alpha(space: &StateSpace, k: &CorrelationVector, alpha: f64) -> Result<f64> {
    k.check_space(space)?;
    norm_alpha_values(space, k.values(), alpha)
}

pub fn norm_alpha_values(space: &StateSpace, values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidParameter { name: "alpha", reason: "must exceed 1" });
    }
    Ok(norm_alpha_unchecked(space, values, alpha))
}

pub(crate) fn norm_alpha_unchecked(space: &StateSpace, values: &[f64], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for n in 0..=space.n_max() {
        let r = space.layer(n);
        if r.is_empty() {
            continue;
        }
        let w = powi(alpha, -(n as i32));
        let m = values[r].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        best = best.max(m * w);
    }
    best
}

/// `T(α, β) = (β − α)/(e ν M(β))`.
pub fn time_horizon(alpha: f64, beta: f64, bounds: &BoundModel, nu: f64) -> Result<f64> {
    if !(alpha.is_finite() && beta.is_finite()) || beta < alpha {
        return Err(Error::InvalidParameter { name: "beta", reason: "must be >= alpha" });
    }
    Ok(horizon(alpha, beta, bounds, nu))
}

#[inline]
pub(crate) fn horizon(alpha: f64, beta: f64, bounds: &BoundModel, nu: f64) -> f64 {
    (beta - alpha) / (E * nu * bounds.m_at(beta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTerminal {
    pub beta: f64,
    pub t_max: f64,
    /// Strict local maxima seen on the scan grid (interior and right end).
    pub local_maxima: usize,
    /// The maximizer sits at `search_hi`.
    pub at_boundary: bool,
}

impl OptimalTerminal {
    pub fn unimodal(&self) -> bool {
        self.local_maxima == 1
    }
}

/// Maximizes `β ↦ T(α_s, β)` over `(α_s, search_hi]`.
pub fn optimal_terminal(alpha_s: f64, bounds: &BoundModel, nu: f64, search_hi: f64) -> Result<OptimalTerminal> {
    if !(search_hi.is_finite() && search_hi > alpha_s) {
        return Err(Error::InvalidParameter { name: "search_hi", reason: "must exceed alpha_s" });
    }
    let n = HORIZON_SCAN_POINTS;
    let grid = |i: usize| alpha_s + (search_hi - alpha_s) * i as f64 / n as f64;
    let vals: alloc::vec::Vec<f64> = (0..=n).map(|i| horizon(alpha_s, grid(i), bounds, nu)).collect();
    let mut best = 1;
    let mut local_maxima = 0;
    for i in 1..=n {
        if vals[i] > vals[best] {
            best = i;
        }
        let left = vals[i] > vals[i - 1];
        let right = i == n || vals[i] > vals[i + 1];
        if left && right {
            local_maxima += 1;
        }
    }
    if best == n {
        return Ok(OptimalTerminal { beta: search_hi, t_max: vals[n], local_maxima, at_boundary: true });
    }
    // golden-section refinement on the bracketing cells
    let f = |b: f64| horizon(alpha_s, b, bounds, nu);
    let (mut lo, mut hi) = (grid(best - 1), grid(best + 1));
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 * (1.0 + hi.abs()) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let beta = 0.5 * (lo + hi);
    let mut t_max = f(beta);
    let mut beta_best = beta;
    if vals[best] > t_max {
        t_max = vals[best];
        beta_best = grid(best);
    }
    Ok(OptimalTerminal { beta: beta_best, t_max, local_maxima, at_boundary: false })
}

/// Smallest `α ≥ α_s` with `T(α_s, α) ≥ t − s`, searched on `[α_s, search_hi]`.
pub fn localization_index(
    t: f64,
    s: f64,
    alpha_s: f64,
    bounds: &BoundModel,
    nu: f64,
    search_hi: f64,
) -> Result<f64> {
    let dt = t - s;
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidParameter { name: "t", reason: "must satisfy t >= s" });
    }
    if dt == 0.0 {
        return Ok(alpha_s);
    }
    let opt = optimal_terminal(alpha_s, bounds, nu, search_hi)?;
    if dt > opt.t_max {
        return Err(Error::HorizonExceeded { requested: dt, horizon: opt.t_max });
    }
    let f = |b: f64| horizon(alpha_s, b, bounds, nu);
    // bracket with a monotone scan, then bisect
    let n = HORIZON_SCAN_POINTS;
    let mut lo = alpha_s;
    let mut hi = opt.beta;
    for i in 1..=n {
        let b = alpha_s + (opt.beta - alpha_s) * i as f64 / n as f64;
        if f(b) >= dt {
            hi = b;
            break;
        }
        lo = b;
    }
    if f(hi) < dt {
        hi = opt.beta;
    }
    while hi - lo > 1e-13 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= dt {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Torus;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_model() -> BoundModel {
        BoundModel {
            m: BoundFn::BirthDeath { avg_a: 1.0, m: 1.0, avg_phi: 1.0, lambda: 1.0 },
            n: BoundFn::Constant(0.0),
        }
    }

    #[test]
    fn norm_examples() {
        let t = Torus::new(1, 4, 1.0).unwrap();
        let sp = StateSpace::new(t, 3).unwrap();
        let mut v = vec![0.0; sp.dim()];
        v[0] = -2.5;
        let k = CorrelationVector::from_values(&sp, v).unwrap();
        assert_eq!(norm_alpha(&sp, &k, 1.7).unwrap(), 2.5);
        assert!(norm_alpha(&sp, &k, 1.0).is_err());
        let a0: f64 = 1.6;
        let g = CorrelationVector::from_fn(&sp, |c| powi(a0, c.len() as i32));
        assert!((norm_alpha(&sp, &g, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((norm_alpha(&sp, &g, 1.2).unwrap() - powi(a0 / 1.2, 3)).abs() < 1e-12);
    }

    #[test]
    fn norm_is_monotone_in_alpha() {
        let t = Torus::new(1, 5, 1.0).unwrap();
        let sp = StateSpace::new(t, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = CorrelationVector::from_fn(&sp, |_| rng.gen_range(-3.0..3.0));
            let a1 = rng.gen_range(1.01..3.0);
            let a2 = a1 + rng.gen_range(0.0..2.0);
            assert!(norm_alpha(&sp, &k, a2).unwrap() <= norm_alpha(&sp, &k, a1).unwrap());
        }
    }

    #[test]
    fn horizon_values() {
        let c = BoundModel { m: BoundFn::Constant(1.0), n: BoundFn::Constant(0.0) };
        assert_eq!(time_horizon(1.4, 1.4, &c, 1.0).unwrap(), 0.0);
        assert!((time_horizon(1.5, 2.5, &c, 1.0).unwrap() - 0.36787944117144233).abs() < 1e-15);
        let t = time_horizon(1.2, 2.0, &unit_model(), 1.0).unwrap();
        let e2 = exp(2.0);
        assert!((t - 0.8 / (4.0 + 2.0 * e2 + 2.0)).abs() < 1e-15);
        assert!(time_horizon(2.0, 1.9, &c, 1.0).is_err());
    }

    #[test]
    fn optimal_terminal_cases() {
        let lin = BoundModel { m: BoundFn::Linear { slope: 1.0 }, n: BoundFn::Constant(0.0) };
        let r = optimal_terminal(1.5, &lin, 1.0, 6.0).unwrap();
        assert!(r.at_boundary);
        assert_eq!(r.beta, 6.0);

        let m = unit_model();
        let r = optimal_terminal(1.2, &m, 1.0, 10.0).unwrap();
        assert!(!r.at_boundary && r.unimodal());
        for i in 0..=1000 {
            let b = 1.2 + 8.8 * i as f64 / 1000.0;
            assert!(r.t_max >= time_horizon(1.2, b, &m, 1.0).unwrap());
        }
    }

    #[test]
    fn localization_cases() {
        let c = BoundModel { m: BoundFn::Constant(1.0), n: BoundFn::Constant(0.0) };
        assert_eq!(localization_index(0.7, 0.7, 1.3, &c, 1.0, 5.0).unwrap(), 1.3);
        let a = localization_index(0.3, 0.1, 1.3, &c, 1.0, 5.0).unwrap();
        assert!((a - (1.3 + E * 0.2)).abs() < 1e-11);

        let m = unit_model();
        let opt = optimal_terminal(1.2, &m, 1.0, 10.0).unwrap();
        for frac in [0.1, 0.5, 0.9, 0.999] {
            let dt = frac * opt.t_max;
            let a = localization_index(dt, 0.0, 1.2, &m, 1.0, 10.0).unwrap();
            assert!((time_horizon(1.2, a, &m, 1.0).unwrap() - dt).abs() <= 1e-9);
        }
        assert!(matches!(
            localization_index(opt.t_max * 1.01, 0.0, 1.2, &m, 1.0, 10.0),
            Err(Error::HorizonExceeded { .. })
        ));
    }
}
