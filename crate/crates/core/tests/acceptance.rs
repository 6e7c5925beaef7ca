//! End-to-end acceptance checks. Each criterion prints one line
//! `criterion N: PASS|FAIL  <measurements>` and the test fails if any fails.

use std::time::{Duration, Instant};

use ovskale_core::bounds::verify_singular_bound;
use ovskale_core::generators::{CorrelationVector, Hierarchy, ModelParams, OperatorKind};
use ovskale_core::kinetic::bifurcation::{
    critical_c_range, stationary_scan, tangency_point, threshold_b, BifurcationInput,
};
use ovskale_core::kinetic::{homogeneous_ode, integrate_ke, DensityField, HomogeneousModel};
use ovskale_core::lattice::{lp_pairing, KernelPair, KernelScale, KernelSpec, StateSpace, SupportedFunction, Torus};
use ovskale_core::scale::{localization_index, norm_alpha, optimal_terminal, time_horizon, BoundModel, ScaleSpec};
use ovskale_core::series::{apriori_estimate_check, flow_compose_check, oracle_evolve, ovsyannikov_evolve, SeriesConfig};
use ovskale_core::vlasov::{chaos_check, semigroup_gap, vlasov_limit, ChaosSetup, EpsilonSweep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const ALPHA_S: f64 = 1.2;
const ALPHA_STAR: f64 = 2.0;

fn gaussian() -> KernelSpec {
    KernelSpec::Gaussian { sigma: 0.2, scale: KernelScale::Mass(1.0) }
}

fn full_params() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0).unwrap()
}

/// Unit-length ring with `sites` sites and Gaussian `a`, `φ` of unit mass.
fn ring(sites: usize) -> KernelPair {
    let t = Torus::new(1, sites, 1.0 / sites as f64).unwrap();
    KernelPair::from_specs(t, &gaussian(), &gaussian()).unwrap()
}

fn hierarchy(sites: usize, n_max: usize) -> Hierarchy {
    let k = ring(sites);
    Hierarchy::new(StateSpace::new(*k.torus(), n_max).unwrap(), k).unwrap()
}

fn bounds_for(h: &Hierarchy) -> BoundModel {
    BoundModel::birth_death(h.kernels(), 1.0, 1.0, 1e-6)
}

fn scale() -> ScaleSpec {
    ScaleSpec::new(ALPHA_S, ALPHA_STAR).unwrap()
}

fn within(start: Instant, limit: Duration) -> (bool, Duration) {
    let e = start.elapsed();
    (e <= limit, e)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let h = hierarchy(8, 3);
    let p = full_params();
    let l = h.operator(OperatorKind::LTriangle, p);
    let sp = h.space();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let order = rng.gen_range(0..=3);
        let window: u64 = rng.gen_range(1..=sp.full_mask());
        let g = SupportedFunction::from_fn(sp, order, window, |_| rng.gen_range(-1.0..1.0));
        let k = CorrelationVector::from_values(sp, (0..sp.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let lhs = lp_pairing(sp, h.apply_l_hat(&g, p).values(), k.values());
        let rhs = lp_pairing(sp, g.values(), l.apply(&k)?.values());
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    let (fast, el) = within(start, Duration::from_secs(10));
    Ok((worst <= 1e-9 && fast, format!("max relative duality gap {worst:.3e}, {el:.2?}")))
}

struct Instance {
    h: Hierarchy,
    bounds: BoundModel,
    t_full: f64,
    u: CorrelationVector,
}

fn instance() -> Instance {
    let h = hierarchy(6, 3);
    let bounds = bounds_for(&h);
    let t_full = time_horizon(ALPHA_S, ALPHA_STAR, &bounds, 1.0).unwrap();
    let u = CorrelationVector::product_form(h.space(), &[0.5; 6]).unwrap();
    Instance { h, bounds, t_full, u }
}

fn criterion_2(inst: &Instance) -> Outcome {
    let start = Instant::now();
    let p = full_params();
    let (a, z) = (inst.h.operator(OperatorKind::A, p), inst.h.operator(OperatorKind::Z, p));
    let span = 0.5 * inst.t_full;
    let sc = scale();
    let cfg = SeriesConfig::auto(&sc, &inst.bounds, span)?;
    let oracle = oracle_evolve(&inst.u, span, &a, &z)?;
    let sp = inst.h.space();
    let on = norm_alpha(sp, &oracle, ALPHA_STAR)?;
    let err = |g: usize, extrapolate: bool| -> Result<f64, Box<dyn std::error::Error>> {
        let mut c = cfg.with_grid_points(g);
        c.extrapolate = extrapolate;
        let r = ovsyannikov_evolve(&inst.u, 0.0, span, &a, &z, &sc, &inst.bounds, &c)?;
        Ok(norm_alpha(sp, &r.final_state().difference(&oracle), ALPHA_STAR)? / on)
    };
    let default_err = err(cfg.grid_points, true)?;
    let (coarse, fine) = (err(5, true)?, err(9, true)?);
    let (raw_coarse, raw_fine) = (err(5, false)?, err(9, false)?);
    let ratio = coarse / fine;
    let (fast, el) = within(start, Duration::from_secs(60));
    Ok((
        default_err <= 1e-6 && ratio >= 4.0 && fast,
        format!(
            "relative error {default_err:.3e} at G={}; extrapolated G=5 {coarse:.3e}, G=9 {fine:.3e}, ratio {ratio:.2}; plain trapezoid ratio {:.5}; {el:.2?}",
            cfg.grid_points,
            raw_coarse / raw_fine
        ),
    ))
}

fn criterion_3(inst: &Instance) -> Outcome {
    let p = full_params();
    let (a, z) = (inst.h.operator(OperatorKind::A, p), inst.h.operator(OperatorKind::Z, p));
    let sc = scale();
    let span = 0.5 * inst.t_full;
    let cfg = SeriesConfig::auto(&sc, &inst.bounds, span)?;
    let r = ovsyannikov_evolve(&inst.u, 0.0, span, &a, &z, &sc, &inst.bounds, &cfg)?;
    let term_violations = r
        .term_norms
        .iter()
        .zip(&r.majorant_values)
        .filter(|(w, m)| **w > **m * (1.0 + 1e-6))
        .count();
    let utilization = r.term_norms.iter().zip(&r.majorant_values).map(|(w, m)| w / m).fold(0.0, f64::max);
    let ap = apriori_estimate_check(&r, inst.h.space(), &sc, &inst.bounds, &cfg)?;
    let ap_util = ap.norms.iter().zip(&ap.bounds).map(|(n, b)| n / b).fold(0.0, f64::max);
    Ok((
        term_violations == 0 && ap.passed(),
        format!(
            "{} terms, {term_violations} majorant violations (max utilization {utilization:.3e}); {} a-priori violations over {} times (max utilization {ap_util:.3e})",
            r.terms_used(),
            ap.violations.len(),
            ap.norms.len()
        ),
    ))
}

fn criterion_4(inst: &Instance) -> Outcome {
    let p = full_params();
    let (a, z) = (inst.h.operator(OperatorKind::A, p), inst.h.operator(OperatorKind::Z, p));
    let sc = scale();
    let cfg = SeriesConfig::auto(&sc, &inst.bounds, 0.6 * inst.t_full)?;
    let f = flow_compose_check(&inst.u, 0.0, 0.3 * inst.t_full, 0.6 * inst.t_full, &a, &z, &sc, &inst.bounds, &cfg)?;
    Ok((f.relative <= 1e-6, format!("relative difference {:.3e}, alpha(tau) = {:.6}", f.relative, f.alpha_tau)))
}

fn criterion_5() -> Outcome {
    let h = hierarchy(8, 3);
    let z = h.operator(OperatorKind::Z, full_params());
    let sc = scale();
    let calibration = BoundModel::birth_death(h.kernels(), 1.0, 1.0, 0.0);
    let fit = verify_singular_bound(&z, &sc, &calibration, 2000, &mut ChaCha8Rng::seed_from_u64(501))?;
    let frozen = fit.frozen_n();
    let bounds = BoundModel::birth_death(h.kernels(), 1.0, 1.0, frozen);
    let test = verify_singular_bound(&z, &sc, &bounds, 500, &mut ChaCha8Rng::seed_from_u64(502))?;
    Ok((
        test.passed(),
        format!(
            "frozen N = {frozen:.3e} (minimal covering {:.3e}); {} violations in 500 fresh samples, max utilization {:.4}",
            fit.minimal_n,
            test.violations.len(),
            test.max_utilization
        ),
    ))
}

fn criterion_6(inst: &Instance) -> Outcome {
    let start = Instant::now();
    let sc = scale();
    let cfg = SeriesConfig::auto(&sc, &inst.bounds, 0.5 * inst.t_full)?;
    let sweep = EpsilonSweep::new(vec![0.4, 0.2, 0.1, 0.05])?;
    let r = vlasov_limit(&sweep, &inst.h, full_params(), &inst.u, 0.0, &sc, &inst.bounds, &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut gaps_ok = true;
    let mut worst = (f64::INFINITY, 0.0f64);
    for &eps in sweep.epsilons() {
        let g = semigroup_gap(&inst.h, eps, cfg.upsilon, ALPHA_S, ALPHA_STAR, 500, &mut rng)?;
        let scaled = g.gap / eps;
        gaps_ok &= scaled <= g.lattice_bound && 2.0 * scaled >= g.lattice_bound && g.lattice_bound <= g.sqest_bound;
        worst = (worst.0.min(scaled / g.lattice_bound), worst.1.max(g.lattice_bound / g.sqest_bound));
    }
    let (fast, el) = within(start, Duration::from_secs(300));
    let errs: Vec<String> = r.rows.iter().map(|row| format!("{:.3e}", row.sup_gap)).collect();
    let ratios: Vec<String> = r.ratios.iter().map(|x| format!("{x:.3}")).collect();
    Ok((
        r.strictly_decreasing() && r.ratios_within(0.3, 0.7) && gaps_ok && fast,
        format!(
            "e = [{}], ratios [{}]; min (gap/eps)/bound {:.3}, bound/log-form bound {:.3}; {el:.2?}",
            errs.join(", "),
            ratios.join(", "),
            worst.0,
            worst.1
        ),
    ))
}

fn criterion_7() -> Outcome {
    let k = ring(8);
    let bounds = BoundModel::birth_death(&k, 1.0, 1.0, 1e-6);
    let sc = scale();
    let t_full = time_horizon(ALPHA_S, ALPHA_STAR, &bounds, 1.0)?;
    let t = 0.3 * t_full;
    let setup = ChaosSetup {
        kernels: &k,
        params: ModelParams::new(1.0, 1.0, 0.0)?,
        scale: sc,
        bounds,
        cfg: SeriesConfig::auto(&sc, &bounds, t)?,
        kinetic_dt: 1e-4,
    };
    let r = chaos_check(&setup, &DensityField::constant(8, 0.5)?, t, 1, 4, 5)?;
    let (g4, g5) = (r.layer_gaps[1], r.layer_gaps_ref[1]);
    Ok((g4 <= 5e-3 && g5 < g4, format!("layer-1 gap {g4:.4e} at N=4, {g5:.4e} at N=5")))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let x0 = tangency_point();
    let closed = (3.0 - 5f64.sqrt()) / 4.0 * (-(1.0 + 5f64.sqrt()) / 2.0).exp();
    let b_err = (threshold_b() - closed).abs();
    let x0_res = (x0 * x0 - x0 - 1.0).abs();
    let fold = critical_c_range(0.02)?;
    let mut ok = b_err <= 1e-12 && x0_res <= 1e-14;
    let mut inside = Vec::new();
    for frac in [0.1, 0.5, 0.9] {
        let c = fold.c_low + frac * (fold.c_high - fold.c_low);
        let n = stationary_scan(&BifurcationInput::new(0.02, c)?)?.count();
        ok &= n == 3;
        inside.push(n);
    }
    let below = stationary_scan(&BifurcationInput::new(0.02, 0.95 * fold.c_low)?)?.count();
    let above = stationary_scan(&BifurcationInput::new(0.02, 1.05 * fold.c_high)?)?.count();
    ok &= below == 1 && above == 1;
    let mut single = Vec::new();
    for c in [0.1, 0.3, 1.0] {
        let n = stationary_scan(&BifurcationInput::new(0.05, c)?)?.count();
        ok &= n == 1;
        single.push(n);
    }
    let (fast, el) = within(start, Duration::from_secs(5));
    Ok((
        ok && fast,
        format!(
            "|b* - closed form| {b_err:.1e}, x0 residual {x0_res:.1e}; b=0.02 fold ({:.6}, {:.6}) roots inside {inside:?}, outside {below}/{above}; b=0.05 roots {single:?}; {el:.2?}",
            fold.c_low, fold.c_high
        ),
    ))
}

fn criterion_9() -> Outcome {
    let k = ring(64);
    let params = full_params();
    let rho0 = DensityField::constant(64, 0.5)?;
    let traj = integrate_ke(&rho0, &k, &params, 1.0, 1e-3)?;
    let model = HomogeneousModel::from_kernels(&k, &params);
    let r = homogeneous_ode(&model, 0.5, 1.0)?;
    let err = traj.final_field().values().iter().map(|v| (v - r).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-8, format!("max |rho(1) - r(1)| = {err:.3e} (r(1) = {r:.10})")))
}

fn criterion_10() -> Outcome {
    let h = hierarchy(6, 3);
    let bounds = bounds_for(&h);
    let search_hi = 20.0;
    let opt = optimal_terminal(ALPHA_S, &bounds, 1.0, search_hi)?;
    let interior = !opt.at_boundary && opt.beta > ALPHA_S && opt.beta < search_hi;
    let mut worst = 0.0f64;
    for frac in [0.05, 0.3, 0.6, 0.95] {
        let dt = frac * opt.t_max;
        let alpha = localization_index(dt, 0.0, ALPHA_S, &bounds, 1.0, search_hi)?;
        worst = worst.max((time_horizon(ALPHA_S, alpha, &bounds, 1.0)? - dt).abs());
    }
    Ok((
        interior && opt.unimodal() && worst <= 1e-9,
        format!(
            "beta* = {:.6}, T_max = {:.6e}, {} local max on the scan; max localization residual {worst:.2e}",
            opt.beta, opt.t_max, opt.local_maxima
        ),
    ))
}

#[test]
fn acceptance() {
    let inst = instance();
    let checks: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2(&inst)),
        (3, criterion_3(&inst)),
        (4, criterion_4(&inst)),
        (5, criterion_5()),
        (6, criterion_6(&inst)),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
    ];
    let mut failed = Vec::new();
    for (i, outcome) in checks {
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {i}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(i);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
