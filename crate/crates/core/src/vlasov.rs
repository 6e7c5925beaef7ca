//! The Vlasov-rescaled family `L_{ε,ren} = A_ε + Z_ε` and its `ε → 0` limit
//! `Z_0`: measured operator gaps, the convergence sweep and chaos propagation.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::bounds::{fit_line, sample_scaled};
use crate::generators::{CorrelationVector, Hierarchy, ModelParams, OperatorKind};
use crate::kinetic::{integrate_ke, DensityField};
use crate::lattice::{KernelPair, StateSpace};
use crate::math::{exp, ln, powi, E};
use crate::scale::{norm_alpha_unchecked, BoundModel, ScaleSpec};
use crate::series::{ovsyannikov_evolve, SeriesConfig};
use crate::{Error, Result};

/// Positive scaling parameters, strictly decreasing; the limit `ε = 0` is
/// always run in addition.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSweep {
    epsilons: Vec<f64>,
}

impl EpsilonSweep {
    pub fn new(epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidParameter { name: "epsilons", reason: "must be finite and > 0" });
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter { name: "epsilons", reason: "must be strictly decreasing" });
        }
        Ok(EpsilonSweep { epsilons })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// The sweep values followed by the limit point 0.
    pub fn points(&self) -> Vec<f64> {
        let mut p = self.epsilons.clone();
        p.push(0.0);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupGap {
    /// `max_u ‖e^{−tεE^a}u − u‖_{α″}/‖u‖_{α′}`.
    pub gap: f64,
    /// `t · max_η E^a(η)(α′/α″)^{|η|}`: the first-order bound on `gap/ε`.
    pub lattice_bound: f64,
    /// `4ā t/(e² ln²(α″/α′))`, which dominates `lattice_bound`.
    pub sqest_bound: f64,
}

/// Sampled gap between `S_ε(t) = e^{−tεE^a}` and `S_0(t) = 1`.
pub fn semigroup_gap<R: Rng + ?Sized>(
    hierarchy: &Hierarchy,
    epsilon: f64,
    t: f64,
    alpha_lo: f64,
    alpha_hi: f64,
    samples: usize,
    rng: &mut R,
) -> Result<SemigroupGap> {
    if !(epsilon >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon/t", reason: "must be >= 0" });
    }
    if !(alpha_lo > 1.0 && alpha_hi > alpha_lo) {
        return Err(Error::InvalidParameter { name: "alpha", reason: "needs 1 < alpha' < alpha''" });
    }
    let sp = hierarchy.space();
    let energy = hierarchy.energies();
    let q = alpha_lo / alpha_hi;
    let lattice_bound = t * (0..sp.dim())
        .map(|i| energy[i] * powi(q, sp.mask(i).count_ones() as i32))
        .fold(0.0, f64::max);
    let l = ln(alpha_hi / alpha_lo);
    let sqest_bound = 4.0 * hierarchy.kernels().sup_a() * t / (E * E * l * l);
    let mut gap = 0.0f64;
    let mut diff = vec![0.0; sp.dim()];
    for _ in 0..samples {
        let u = sample_scaled(sp, alpha_lo, rng);
        for (i, d) in diff.iter_mut().enumerate() {
            *d = u[i] * (exp(-t * epsilon * energy[i]) - 1.0);
        }
        let nu = norm_alpha_unchecked(sp, &u, alpha_lo);
        gap = gap.max(norm_alpha_unchecked(sp, &diff, alpha_hi) / nu);
    }
    Ok(SemigroupGap { gap, lattice_bound, sqest_bound })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZGap {
    /// `(α′, α″, ‖Z_εu − Z_0u‖_{α″}/‖u‖_{α′})` per sample.
    pub samples: Vec<(f64, f64, f64)>,
    pub gap: f64,
    /// Least squares `ratio ≈ P̂ (1/(α″−α′) + 1/(α″−α′)²)`.
    pub fitted_p: f64,
    /// `‖ratio − fit‖₂/‖ratio‖₂`.
    pub fit_residual: f64,
    /// Unconstrained two-coefficient fit `ratio ≈ P₁/δ + P₂/δ²`.
    pub fitted_p1: f64,
    pub fitted_p2: f64,
}

impl ZGap {
    /// The fitted two-pole profile explains the samples to within 10%.
    pub fn two_pole_ok(&self) -> bool {
        self.fit_residual < 0.1
    }
}

/// Sampled gap `‖Z_ε u − Z_0 u‖_{α″}/‖u‖_{α′}` with `α′ < α″ ≤ α*`.
pub fn z_gap<R: Rng + ?Sized>(
    hierarchy: &Hierarchy,
    params: ModelParams,
    epsilon: f64,
    scale: &ScaleSpec,
    samples: usize,
    rng: &mut R,
) -> Result<ZGap> {
    let ze = hierarchy.operator(OperatorKind::ZEps, params.with_epsilon(epsilon)?);
    let z0 = hierarchy.operator(OperatorKind::Z0, params);
    let sp = hierarchy.space();
    let mut a = vec![0.0; sp.dim()];
    let mut b = vec![0.0; sp.dim()];
    let mut records = Vec::with_capacity(samples);
    for _ in 0..samples {
        let lo = rng.gen_range(scale.alpha_under..scale.alpha_star);
        let mut hi = rng.gen_range(lo..=scale.alpha_star);
        if hi <= lo {
            hi = scale.alpha_star;
        }
        let u = sample_scaled(sp, lo, rng);
        ze.apply_into(&u, &mut a);
        z0.apply_into(&u, &mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x -= y;
        }
        let r = norm_alpha_unchecked(sp, &a, hi) / norm_alpha_unchecked(sp, &u, lo);
        records.push((lo, hi, r));
    }
    Ok(summarize_z_gap(records))
}

fn summarize_z_gap(samples: Vec<(f64, f64, f64)>) -> ZGap {
    let gap = samples.iter().map(|s| s.2).fold(0.0, f64::max);
    let (mut sfy, mut sff, mut syy) = (0.0, 0.0, 0.0);
    for &(lo, hi, y) in &samples {
        let x = 1.0 / (hi - lo);
        let f = x + x * x;
        sfy += f * y;
        sff += f * f;
        syy += y * y;
    }
    let p = if sff > 0.0 { sfy / sff } else { 0.0 };
    let res: f64 = samples
        .iter()
        .map(|&(lo, hi, y)| {
            let x = 1.0 / (hi - lo);
            let e = y - p * (x + x * x);
            e * e
        })
        .sum();
    let fit_residual = if syy > 0.0 { libm::sqrt(res / syy) } else { 0.0 };
    // ratio·δ² ≈ P₁δ + P₂
    let (p1, p2) = fit_line(samples.iter().map(|&(lo, hi, y)| {
        let d = hi - lo;
        (d, y * d * d)
    }));
    ZGap { samples, gap, fitted_p: p, fit_residual, fitted_p1: p1, fitted_p2: p2 }
}

/// One run of the rescaled hierarchy: `(A_ε, Z_ε)` for `ε > 0`, `(0, Z_0)` at 0.
#[allow(clippy::too_many_arguments)]
pub fn run_epsilon(
    hierarchy: &Hierarchy,
    params: ModelParams,
    epsilon: f64,
    u0: &CorrelationVector,
    s: f64,
    t: f64,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    cfg: &SeriesConfig,
) -> Result<crate::series::EvolutionResult> {
    let p = params.with_epsilon(epsilon)?;
    let (ka, kz) = (OperatorKind::AEps, if epsilon == 0.0 { OperatorKind::Z0 } else { OperatorKind::ZEps });
    let a = hierarchy.operator(ka, p);
    let z = hierarchy.operator(kz, p);
    ovsyannikov_evolve(u0, s, t, &a, &z, scale, bounds, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `sup_t ‖u_ε(t) − u_0(t)‖_{α*}` over the shared grid.
    pub sup_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VlasovReport {
    pub rows: Vec<SweepRow>,
    /// `e(ε_{k+1})/e(ε_k)` along the sweep.
    pub ratios: Vec<f64>,
}

impl VlasovReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_gap < w[0].sup_gap)
    }

    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.ratios.iter().all(|r| *r >= lo && *r <= hi)
    }
}

/// A failure of one sweep member, tagged with its `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepError {
    pub epsilon: f64,
    pub error: Error,
}

impl core::fmt::Display for SweepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "epsilon = {}: {}", self.epsilon, self.error)
    }
}

impl core::error::Error for SweepError {}

/// Runs every `ε` of the sweep and the limit on `[s, s+Υ]` with one shared
/// config and initial datum.
#[allow(clippy::too_many_arguments)]
pub fn vlasov_limit(
    sweep: &EpsilonSweep,
    hierarchy: &Hierarchy,
    params: ModelParams,
    u0: &CorrelationVector,
    s: f64,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    cfg: &SeriesConfig,
) -> core::result::Result<VlasovReport, SweepError> {
    let t = s + cfg.upsilon;
    let tag = |epsilon: f64| move |error: Error| SweepError { epsilon, error };
    let limit = run_epsilon(hierarchy, params, 0.0, u0, s, t, scale, bounds, cfg).map_err(tag(0.0))?;
    let sp = hierarchy.space();
    let mut rows = Vec::with_capacity(sweep.epsilons.len());
    for &eps in &sweep.epsilons {
        let r = run_epsilon(hierarchy, params, eps, u0, s, t, scale, bounds, cfg).map_err(tag(eps))?;
        let sup_gap = r
            .trajectory
            .iter()
            .zip(&limit.trajectory)
            .map(|(x, y)| norm_alpha_unchecked(sp, x.difference(y).values(), scale.alpha_star))
            .fold(0.0, f64::max);
        rows.push(SweepRow { epsilon: eps, sup_gap });
    }
    let ratios = rows.windows(2).map(|w| w[1].sup_gap / w[0].sup_gap).collect();
    Ok(VlasovReport { rows, ratios })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosReport {
    /// `max_{|η|=n} |k_t(η) − e_λ(ρ_t,η)|` for `n = 0..=n_probe` at `n_max`.
    pub layer_gaps: Vec<f64>,
    /// The same at the reference truncation `n_max_ref`.
    pub layer_gaps_ref: Vec<f64>,
    pub rho_t: DensityField,
    pub n_max: usize,
    pub n_max_ref: usize,
}

/// Shared inputs of a chaos-propagation check.
#[derive(Debug, Clone, Copy)]
pub struct ChaosSetup<'a> {
    pub kernels: &'a KernelPair,
    pub params: ModelParams,
    pub scale: ScaleSpec,
    pub bounds: BoundModel,
    pub cfg: SeriesConfig,
    /// Step of the kinetic RK4 integrator.
    pub kinetic_dt: f64,
}

/// Evolves `k_0 = e_λ(ρ_0,·)` under `Z_0` and `ρ_0` under the kinetic
/// equation, comparing `k_t` with `e_λ(ρ_t,·)` layer by layer.
pub fn chaos_check(setup: &ChaosSetup<'_>, rho0: &DensityField, t: f64, n_probe: usize, n_max: usize, n_max_ref: usize) -> Result<ChaosReport> {
    if n_probe > n_max || n_probe > n_max_ref {
        return Err(Error::InvalidParameter { name: "n_probe", reason: "must not exceed the truncation orders" });
    }
    let traj = integrate_ke(rho0, setup.kernels, &setup.params, t, setup.kinetic_dt)?;
    let rho_t = traj.final_field().clone();
    let gaps = |order: usize| -> Result<Vec<f64>> {
        let space = StateSpace::new(*setup.kernels.torus(), order)?;
        let h = Hierarchy::new(space, setup.kernels.clone())?;
        let sp = h.space();
        let k0 = CorrelationVector::product_form(sp, rho0.values())?;
        let kt = if t > 0.0 {
            run_epsilon(&h, setup.params, 0.0, &k0, 0.0, t, &setup.scale, &setup.bounds, &setup.cfg)?.final_state().clone()
        } else {
            k0
        };
        let prod = CorrelationVector::product_form(sp, rho_t.values())?;
        Ok((0..=n_probe)
            .map(|n| {
                sp.layer(n)
                    .map(|i| (kt.values()[i] - prod.values()[i]).abs())
                    .fold(0.0, f64::max)
            })
            .collect())
    };
    Ok(ChaosReport { layer_gaps: gaps(n_max)?, layer_gaps_ref: gaps(n_max_ref)?, rho_t, n_max, n_max_ref })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{KernelScale, KernelSpec, Torus};
    use crate::scale::horizon;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hierarchy(a: &KernelSpec, phi: &KernelSpec, sites: usize, n_max: usize) -> Hierarchy {
        let t = Torus::new(1, sites, 1.0 / sites as f64).unwrap();
        let k = KernelPair::from_specs(t, a, phi).unwrap();
        Hierarchy::new(StateSpace::new(t, n_max).unwrap(), k).unwrap()
    }

    fn gauss(mass: f64) -> KernelSpec {
        KernelSpec::Gaussian { sigma: 0.2, scale: KernelScale::Mass(mass) }
    }

    #[test]
    fn sweep_validation() {
        assert!(EpsilonSweep::new(vec![0.4, 0.2, 0.1]).is_ok());
        assert!(EpsilonSweep::new(vec![0.2, 0.4]).is_err());
        assert!(EpsilonSweep::new(vec![0.2, 0.0]).is_err());
        assert_eq!(EpsilonSweep::new(vec![0.3]).unwrap().points(), vec![0.3, 0.0]);
    }

    #[test]
    fn gaps_vanish_at_zero() {
        let h = hierarchy(&gauss(1.0), &gauss(1.0), 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(semigroup_gap(&h, 0.0, 0.5, 1.2, 2.0, 20, &mut rng).unwrap().gap, 0.0);
        let sc = ScaleSpec::new(1.2, 2.0).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(z_gap(&h, p, 0.0, &sc, 20, &mut rng).unwrap().gap, 0.0);
    }

    #[test]
    fn semigroup_gap_respects_bounds() {
        let h = hierarchy(&gauss(1.0), &gauss(1.0), 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut prev = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let g = semigroup_gap(&h, eps, 0.05, 1.2, 2.0, 200, &mut rng).unwrap();
            assert!(g.gap / eps <= g.lattice_bound);
            assert!(g.lattice_bound <= g.sqest_bound);
            assert!(g.gap < prev);
            prev = g.gap;
        }
    }

    #[test]
    fn a_and_birth_terms_do_not_enter_the_z_gap() {
        let h = hierarchy(&gauss(1.0), &KernelSpec::zero(), 6, 3);
        let sc = ScaleSpec::new(1.2, 2.0).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(z_gap(&h, p, 0.3, &sc, 20, &mut rng).unwrap().gap, 0.0);
    }

    #[test]
    fn zero_datum_and_noninteracting_sweeps() {
        let sweep = EpsilonSweep::new(vec![0.4, 0.2]).unwrap();
        let sc = ScaleSpec::new(1.2, 2.0).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        for (a, phi) in [(gauss(1.0), gauss(1.0)), (KernelSpec::zero(), KernelSpec::zero())] {
            let h = hierarchy(&a, &phi, 5, 2);
            let b = BoundModel::birth_death(h.kernels(), 1.0, 1.0, 1e-6);
            let cfg = SeriesConfig::auto(&sc, &b, 0.5 * horizon(1.2, 2.0, &b, 1.0)).unwrap();
            let zero = CorrelationVector::zeros(h.space());
            let r = vlasov_limit(&sweep, &h, p, &zero, 0.0, &sc, &b, &cfg).unwrap();
            assert!(r.rows.iter().all(|row| row.sup_gap == 0.0));
        }
        let h = hierarchy(&KernelSpec::zero(), &KernelSpec::zero(), 5, 2);
        let b = BoundModel::birth_death(h.kernels(), 1.0, 1.0, 1e-6);
        let cfg = SeriesConfig::auto(&sc, &b, 0.5 * horizon(1.2, 2.0, &b, 1.0)).unwrap();
        let u = CorrelationVector::product_form(h.space(), &[0.5; 5]).unwrap();
        let r = vlasov_limit(&sweep, &h, p, &u, 0.0, &sc, &b, &cfg).unwrap();
        assert!(r.rows.iter().all(|row| row.sup_gap == 0.0));
    }

    #[test]
    fn chaos_pure_birth_and_time_zero() {
        let t = Torus::new(1, 4, 0.25).unwrap();
        let k = KernelPair::from_specs(t, &KernelSpec::zero(), &KernelSpec::zero()).unwrap();
        let p = ModelParams::new(0.0, 0.8, 0.0).unwrap();
        let sc = ScaleSpec::new(1.2, 3.0).unwrap();
        let b = BoundModel::birth_death(&k, 0.0, 0.8, 1e-6);
        let big_t = horizon(1.2, 3.0, &b, 1.0);
        let cfg = SeriesConfig::auto(&sc, &b, 0.5 * big_t).unwrap();
        let setup = ChaosSetup { kernels: &k, params: p, scale: sc, bounds: b, cfg, kinetic_dt: 1e-3 };
        let rho = DensityField::constant(4, 0.5).unwrap();
        let r0 = chaos_check(&setup, &rho, 0.0, 2, 2, 3).unwrap();
        assert!(r0.layer_gaps.iter().all(|g| *g == 0.0));
        let r = chaos_check(&setup, &rho, 0.4 * big_t, 2, 2, 3).unwrap();
        assert!((r.rho_t.values()[0] - (0.5 + 0.8 * 0.4 * big_t)).abs() < 1e-14);
        assert!(r.layer_gaps.iter().all(|g| *g < 1e-10), "{:?}", r.layer_gaps);
    }
}
