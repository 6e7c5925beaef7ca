//! One function per experiment family. Each writes its data files into the
//! output directory and returns the checked assertions.

use std::path::{Path, PathBuf};

use ovskale_core::bounds::verify_singular_bound;
use ovskale_core::kinetic::bifurcation::{critical_c_range, fold_curve, stationary_scan, threshold_b, BifurcationInput};
use ovskale_core::kinetic::{homogeneous_ode, integrate_ke, DensityField, HomogeneousModel};
use ovskale_core::scale::{localization_index, norm_alpha, optimal_terminal, time_horizon};
use ovskale_core::series::{apriori_estimate_check, flow_compose_check, oracle_evolve, ovsyannikov_evolve};
use ovskale_core::vlasov::{semigroup_gap, vlasov_limit, z_gap, EpsilonSweep};
use ovskale_core::{
    BoundModel, CorrelationVector, Hierarchy, KernelPair, ModelParams, OperatorKind, ScaleSpec, SeriesConfig,
    StateSpace,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, InitialField, InitialState, ModelBlock, SolverBlock};
use crate::error::CliError;
use crate::io::{write_json, Cell, CorrelationJson, Table};
use crate::manifest::Assertion;
use crate::plotdata;

/// Tolerance for the oracle and flow checks of `evolve`.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Relative slack on the majorant comparison.
pub const MAJORANT_TOL: f64 = 1e-6;
/// Localization residual accepted by `horizon`.
pub const LOCALIZATION_TOL: f64 = 1e-9;

pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    /// Directory of the config file; relative input paths start here.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub verbose: bool,
}

#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<String>,
    pub assertions: Vec<Assertion>,
}

impl RunOutput {
    fn table(&mut self, ctx: &RunContext<'_>, name: &str, t: &Table) -> Result<(), CliError> {
        t.write(&ctx.out_dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn plot(&mut self, ctx: &RunContext<'_>, name: &str, t: &Table) -> Result<(), CliError> {
        if ctx.config.output.plotdata {
            self.table(ctx, name, t)?;
        }
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, ctx: &RunContext<'_>, name: &str, v: &T) -> Result<(), CliError> {
        write_json(&ctx.out_dir.join(name), v)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }
}

impl RunContext<'_> {
    fn note(&self, msg: &str) {
        if self.verbose {
            eprintln!("[ovskale] {msg}");
        }
    }

    fn model(&self) -> Result<&ModelBlock, CliError> {
        self.config.model.as_ref().ok_or_else(|| CliError::Config("missing model block".into()))
    }

    fn scale(&self) -> Result<ScaleSpec, CliError> {
        self.config.scale.as_ref().ok_or_else(|| CliError::Config("missing scale block".into()))?.build()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

struct HierarchySetup {
    hierarchy: Hierarchy,
    params: ModelParams,
    bounds: BoundModel,
    scale: ScaleSpec,
    t_full: f64,
}

fn hierarchy_setup(ctx: &RunContext<'_>) -> Result<HierarchySetup, CliError> {
    let m = ctx.model()?;
    let kernels = m.kernels.build()?;
    let space = StateSpace::new(*kernels.torus(), m.n_max)?;
    let bounds = BoundModel::birth_death(&kernels, m.m, m.lambda, m.n_hat);
    let hierarchy = Hierarchy::new(space, kernels)?;
    let scale = ctx.scale()?;
    let t_full = time_horizon(scale.alpha_s, scale.alpha_star, &bounds, scale.nu)?;
    Ok(HierarchySetup { hierarchy, params: ModelParams::new(m.m, m.lambda, 1.0)?, bounds, scale, t_full })
}

/// `SeriesConfig::auto` for `default_upsilon`, then any explicit overrides.
pub fn series_config(
    block: &SolverBlock,
    scale: &ScaleSpec,
    bounds: &BoundModel,
    default_upsilon: f64,
) -> Result<SeriesConfig, CliError> {
    let mut cfg = SeriesConfig::auto(scale, bounds, block.upsilon.unwrap_or(default_upsilon))?;
    if let Some(q) = block.q {
        cfg.q = q;
    }
    if let Some(a) = block.alpha {
        cfg.alpha = a;
    }
    if let Some(n) = block.n_max {
        cfg.n_max = n;
    }
    if let Some(t) = block.term_tol {
        cfg.term_tol = t;
    }
    if let Some(t) = block.quad_tol {
        cfg.quad_tol = t;
    }
    if let Some(g) = block.grid_points {
        cfg.grid_points = g;
    }
    if let Some(e) = block.extrapolate {
        cfg.extrapolate = e;
    }
    cfg.validate(scale, bounds)?;
    Ok(cfg)
}

fn initial_state(ctx: &RunContext<'_>, space: &StateSpace, init: &InitialState) -> Result<CorrelationVector, CliError> {
    Ok(match init {
        InitialState::Product(r) => CorrelationVector::product_form(space, &vec![*r; space.sites()])?,
        InitialState::Density(rho) => CorrelationVector::product_form(space, rho)?,
        InitialState::File(p) => CorrelationJson::read(&ctx.resolve(p))?.to_vector(space)?,
    })
}

pub fn run(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    ctx.note(&format!("experiment {}", ctx.config.experiment.name()));
    match &ctx.config.experiment {
        Experiment::Evolve { .. } => evolve(ctx),
        Experiment::Vlasov { .. } => vlasov(ctx),
        Experiment::Kinetic { .. } => kinetic(ctx),
        Experiment::Bifurcation { .. } => bifurcation(ctx),
        Experiment::Bounds { .. } => bounds(ctx),
        Experiment::Horizon { .. } => horizon(ctx),
    }
}

fn evolve(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Evolve { initial, t_fraction, span, s, oracle, flow_tau_fraction } = &ctx.config.experiment else {
        unreachable!()
    };
    let hs = hierarchy_setup(ctx)?;
    let sp = hs.hierarchy.space();
    let span = span.unwrap_or_else(|| t_fraction.unwrap_or(0.5) * hs.t_full);
    let cfg = series_config(&ctx.config.solver, &hs.scale, &hs.bounds, span)?;
    let u0 = initial_state(ctx, sp, initial)?;
    let a = hs.hierarchy.operator(OperatorKind::A, hs.params);
    let z = hs.hierarchy.operator(OperatorKind::Z, hs.params);
    ctx.note(&format!("T = {:.6e}, t - s = {span:.6e}, alpha = {:.6}, q = {:.6}", hs.t_full, cfg.alpha, cfg.q));
    let r = ovsyannikov_evolve(&u0, *s, s + span, &a, &z, &hs.scale, &hs.bounds, &cfg)?;
    let ap = apriori_estimate_check(&r, sp, &hs.scale, &hs.bounds, &cfg)?;
    let mut out = RunOutput::default();

    let mut traj = Table::new(&["t", "norm_alpha", "norm_alpha_star", "apriori_bound", "apriori_corrected_bound"]);
    for (i, (t, k)) in r.times.iter().zip(&r.trajectory).enumerate() {
        traj.push(vec![
            Cell::Num(*t),
            Cell::Num(norm_alpha(sp, k, cfg.alpha)?),
            Cell::Num(norm_alpha(sp, k, hs.scale.alpha_star)?),
            Cell::Num(ap.bounds[i]),
            Cell::Num(ap.corrected_bounds[i]),
        ]);
    }
    out.table(ctx, "trajectory.csv", &traj)?;
    let mut terms = Table::new(&["n", "term_norm", "majorant", "root_test"]);
    for (n, (w, m)) in r.term_norms.iter().zip(&r.majorant_values).enumerate() {
        let root = if n == 0 { Cell::Empty } else { r.root_test.get(n - 1).map_or(Cell::Empty, |v| Cell::Num(*v)) };
        terms.push(vec![Cell::from(n), Cell::Num(*w), Cell::Num(*m), root]);
    }
    out.table(ctx, "terms.csv", &terms)?;
    out.plot(ctx, "plot_majorant.csv", &plotdata::majorant(&r.term_norms, &r.majorant_values))?;
    out.json(ctx, "final_state.json", &CorrelationJson::from_vector(sp, r.final_state()))?;

    let exceed = r.term_norms.iter().zip(&r.majorant_values).filter(|(w, m)| **w > **m * (1.0 + MAJORANT_TOL)).count();
    out.check("majorant", exceed == 0, format!("{exceed} of {} terms above their majorant", r.terms_used()));
    out.check("apriori", ap.passed(), format!("{} of {} output times above the bound", ap.violations.len(), ap.norms.len()));
    out.check(
        "apriori_corrected",
        ap.corrected_passed(),
        format!("{} of {} output times above the bound with the n = 0 term kept", ap.corrected_violations.len(), ap.norms.len()),
    );
    out.check("series_converged", r.converged, format!("{} terms, quadrature estimate {:.3e}", r.terms_used(), r.quad_error_estimate));

    let mut summary = json!({
        "t_full": hs.t_full, "t_prime": r.horizon.t_prime, "upsilon": cfg.upsilon, "q": cfg.q, "alpha": cfg.alpha,
        "s": s, "t": s + span, "terms_used": r.terms_used(), "converged": r.converged,
        "quad_error_estimate": r.quad_error_estimate, "apriori_c": ap.c, "t_star": ap.t_star, "n_star": ap.n_star,
    });
    if *oracle {
        let o = oracle_evolve(&u0, span, &a, &z)?;
        let on = norm_alpha(sp, &o, hs.scale.alpha_star)?;
        let diff = norm_alpha(sp, &r.final_state().difference(&o), hs.scale.alpha_star)?;
        let rel = if on > 0.0 { diff / on } else { diff };
        out.check("oracle_agreement", rel <= AGREEMENT_TOL, format!("relative difference {rel:.3e}"));
        summary["oracle_relative_difference"] = json!(rel);
    }
    if let Some(f) = flow_tau_fraction {
        let fl = flow_compose_check(&u0, *s, s + f * span, s + span, &a, &z, &hs.scale, &hs.bounds, &cfg)?;
        out.check("flow", fl.relative <= AGREEMENT_TOL, format!("relative difference {:.3e}", fl.relative));
        summary["flow_relative_difference"] = json!(fl.relative);
        summary["flow_alpha_tau"] = json!(fl.alpha_tau);
    }
    out.json(ctx, "summary.json", &summary)?;
    Ok(out)
}

fn vlasov(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Vlasov { epsilons, initial, t_fraction, samples, ratio_window } = &ctx.config.experiment else {
        unreachable!()
    };
    let hs = hierarchy_setup(ctx)?;
    let sp = hs.hierarchy.space();
    let sweep = EpsilonSweep::new(epsilons.clone())?;
    let cfg = series_config(&ctx.config.solver, &hs.scale, &hs.bounds, t_fraction * hs.t_full)?;
    let u0 = initial_state(ctx, sp, initial)?;
    let report = vlasov_limit(&sweep, &hs.hierarchy, hs.params, &u0, 0.0, &hs.scale, &hs.bounds, &cfg)
        .map_err(|e| CliError::from(e.error))?;
    let (a_lo, a_hi) = (hs.scale.alpha_s, hs.scale.alpha_star);
    let gaps = epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut rng = ctx.rng(i as u64);
            let g = semigroup_gap(&hs.hierarchy, eps, cfg.upsilon, a_lo, a_hi, *samples, &mut rng)?;
            let z = z_gap(&hs.hierarchy, hs.params, eps, &hs.scale, *samples, &mut rng)?;
            Ok((g, z))
        })
        .collect::<Result<Vec<_>, ovskale_core::Error>>()?;

    let mut out = RunOutput::default();
    let mut t = Table::new(&[
        "epsilon",
        "sup_gap",
        "semigroup_gap",
        "Z_gap_fitted_P",
        "semigroup_lattice_bound",
        "semigroup_log_bound",
        "Z_gap",
        "Z_gap_fit_residual",
    ]);
    let mut gap_ok = true;
    for (row, (g, z)) in report.rows.iter().zip(&gaps) {
        let scaled = g.gap / row.epsilon;
        gap_ok &= scaled <= g.lattice_bound && 2.0 * scaled >= g.lattice_bound && g.lattice_bound <= g.sqest_bound;
        t.push(vec![
            Cell::Num(row.epsilon),
            Cell::Num(row.sup_gap),
            Cell::Num(g.gap),
            Cell::Num(z.fitted_p),
            Cell::Num(g.lattice_bound),
            Cell::Num(g.sqest_bound),
            Cell::Num(z.gap),
            Cell::Num(z.fit_residual),
        ]);
    }
    out.table(ctx, "sweep.csv", &t)?;
    out.plot(ctx, "plot_sweep.csv", &plotdata::sweep(&report.rows))?;
    out.check("sup_gap_decreasing", report.strictly_decreasing(), format!("{} sweep points", report.rows.len()));
    out.check(
        "ratio_window",
        report.ratios_within(ratio_window[0], ratio_window[1]),
        format!("ratios {:?} against [{}, {}]", report.ratios, ratio_window[0], ratio_window[1]),
    );
    out.check("semigroup_gap_bound", gap_ok, "gap/eps within a factor 2 below the lattice bound".into());
    let two_pole: Vec<bool> = gaps.iter().map(|(_, z)| z.two_pole_ok()).collect();
    out.json(
        ctx,
        "summary.json",
        &json!({
            "upsilon": cfg.upsilon, "t_full": hs.t_full,
            "epsilons": epsilons, "sup_gaps": report.rows.iter().map(|r| r.sup_gap).collect::<Vec<_>>(),
            "ratios": report.ratios, "z_gap_two_pole_fit_ok": two_pole,
            "passed": out.assertions.iter().all(|a| a.passed),
        }),
    )?;
    Ok(out)
}

fn kinetic(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Kinetic { initial, t_end, dt, record_every, full_field, homogeneous_tol } = &ctx.config.experiment
    else {
        unreachable!()
    };
    let m = ctx.model()?;
    let kernels: KernelPair = m.kernels.build()?;
    let sites = kernels.torus().site_count();
    let rho0 = match initial {
        InitialField::Constant(r) => DensityField::constant(sites, *r)?,
        InitialField::Values(v) => DensityField::new(v.clone())?,
    };
    let params = ModelParams::new(m.m, m.lambda, 0.0)?;
    let traj = integrate_ke(&rho0, &kernels, &params, *t_end, *dt)?;
    let mut out = RunOutput::default();
    let mut header: Vec<String> = ["t", "min_rho", "max_rho", "mean_rho"].iter().map(|s| s.to_string()).collect();
    if *full_field {
        header.extend((0..sites).map(|i| format!("rho_{i}")));
    }
    let mut t = Table::new(&header);
    let last = traj.times.len() - 1;
    for (i, (time, f)) in traj.times.iter().zip(&traj.fields).enumerate() {
        if i % record_every != 0 && i != last {
            continue;
        }
        let mut row = vec![Cell::Num(*time), Cell::Num(f.min()), Cell::Num(f.max()), Cell::Num(f.mean())];
        if *full_field {
            row.extend(f.values().iter().map(|v| Cell::Num(*v)));
        }
        t.push(row);
    }
    out.table(ctx, "trajectory.csv", &t)?;
    let min = traj.fields.iter().map(DensityField::min).fold(f64::INFINITY, f64::min);
    out.check("nonnegative", min >= 0.0, format!("minimum density {min:.6e}"));
    let mut summary = json!({
        "t_end": t_end, "dt": dt, "steps": last, "rejected_steps": traj.rejected_steps,
        "final_min": traj.final_field().min(), "final_max": traj.final_field().max(),
        "final_mean": traj.final_field().mean(),
    });
    if let Some(tol) = homogeneous_tol {
        let InitialField::Constant(r0) = initial else {
            return Err(CliError::Config("homogeneous_tol needs a constant initial field".into()));
        };
        let r = homogeneous_ode(&HomogeneousModel::from_kernels(&kernels, &params), *r0, *t_end)?;
        let err = traj.final_field().values().iter().map(|v| (v - r).abs()).fold(0.0, f64::max);
        out.check("homogeneous_match", err <= *tol, format!("max deviation {err:.3e} from r(t) = {r:.12}"));
        summary["homogeneous_value"] = json!(r);
        summary["homogeneous_deviation"] = json!(err);
    }
    out.json(ctx, "summary.json", &summary)?;
    Ok(out)
}

/// Relative distance below which `c` counts as sitting on the fold boundary.
const FOLD_EDGE: f64 = 1e-9;

fn bifurcation(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Bifurcation { b, c, x_hi, resolution, fold_b, expect_roots } = &ctx.config.experiment else {
        unreachable!()
    };
    let grid: Vec<(f64, f64)> = b.iter().flat_map(|&bv| c.iter().map(move |&cv| (bv, cv))).collect();
    let scans = grid
        .par_iter()
        .map(|&(bv, cv)| {
            let inp = BifurcationInput {
                b: bv,
                c: cv,
                x_hi: x_hi.unwrap_or(BifurcationInput::DEFAULT_X_HI),
                resolution: resolution.unwrap_or(BifurcationInput::DEFAULT_RESOLUTION),
            };
            stationary_scan(&inp)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let width = scans.iter().map(|s| s.count()).max().unwrap_or(0).max(1);
    let mut header: Vec<String> = ["b", "c", "root_count", "edge_warning", "tangency"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=width).map(|i| format!("root_{i}")));
    let mut t = Table::new(&header);
    let b_star = threshold_b();
    let mut fold_mismatch = 0usize;
    let mut expect_mismatch = 0usize;
    for (&(bv, cv), s) in grid.iter().zip(&scans) {
        let mut row = vec![
            Cell::Num(bv),
            Cell::Num(cv),
            Cell::from(s.count()),
            Cell::from(s.edge_warning as usize),
            Cell::from(s.tangency as usize),
        ];
        row.extend((0..width).map(|i| s.roots.get(i).map_or(Cell::Empty, |x| Cell::Num(*x))));
        t.push(row);
        if expect_roots.is_some_and(|n| n != s.count()) {
            expect_mismatch += 1;
        }
        if bv > 0.0 {
            let expected = if bv < b_star {
                let f = critical_c_range(bv)?;
                let near = |edge: f64| (cv - edge).abs() <= FOLD_EDGE * edge;
                if near(f.c_low) || near(f.c_high) {
                    None
                } else {
                    Some(if f.contains(cv) { 3 } else { 1 })
                }
            } else if bv > b_star {
                Some(1)
            } else {
                None
            };
            if expected.is_some_and(|n| n != s.count()) {
                fold_mismatch += 1;
            }
        }
    }
    let mut out = RunOutput::default();
    out.table(ctx, "bifurcation.csv", &t)?;
    let fold = fold_curve(fold_b)?;
    let fold_doc: Vec<_> = fold
        .iter()
        .map(|(bv, r)| json!({"b": bv, "c_low": r.c_low, "c_high": r.c_high, "x_max": r.x_max, "x_min": r.x_min}))
        .collect();
    out.json(ctx, "fold_curve.json", &json!({"b_star": b_star, "curve": fold_doc}))?;
    out.plot(ctx, "plot_fold.csv", &plotdata::fold(&fold))?;
    out.check("fold_consistency", fold_mismatch == 0, format!("{fold_mismatch} of {} grid points disagree with the fold interval", grid.len()));
    if let Some(n) = expect_roots {
        out.check("expected_root_count", expect_mismatch == 0, format!("{expect_mismatch} grid points without exactly {n} roots"));
    }
    Ok(out)
}

fn bounds(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Bounds { samples, calibration_samples } = &ctx.config.experiment else { unreachable!() };
    let m = ctx.model()?;
    let kernels = m.kernels.build()?;
    let space = StateSpace::new(*kernels.torus(), m.n_max)?;
    let h = Hierarchy::new(space, kernels)?;
    let scale = ctx.scale()?;
    let z = h.operator(OperatorKind::Z, ModelParams::new(m.m, m.lambda, 1.0)?);
    let (n_hat, calibration) = if *calibration_samples > 0 {
        let free = BoundModel::birth_death(h.kernels(), m.m, m.lambda, 0.0);
        let fit = verify_singular_bound(&z, &scale, &free, *calibration_samples, &mut ctx.rng(0))?;
        (fit.frozen_n(), Some(fit))
    } else {
        (m.n_hat, None)
    };
    let bm = BoundModel::birth_death(h.kernels(), m.m, m.lambda, n_hat);
    let rep = verify_singular_bound(&z, &scale, &bm, *samples, &mut ctx.rng(1))?;
    let mut out = RunOutput::default();
    let mut t = Table::new(&["alpha_lo", "alpha_hi", "ratio", "bound"]);
    for s in &rep.samples {
        t.push(vec![Cell::Num(s.alpha_lo), Cell::Num(s.alpha_hi), Cell::Num(s.ratio), Cell::Num(s.bound)]);
    }
    out.table(ctx, "samples.csv", &t)?;
    out.check("singular_bound", rep.passed(), format!("{} violations in {} samples", rep.violations.len(), rep.samples.len()));
    out.json(
        ctx,
        "summary.json",
        &json!({
            "m_alpha_star": bm.m_at(scale.alpha_star), "n_hat": n_hat,
            "calibration_minimal_n": calibration.as_ref().map(|c| c.minimal_n),
            "fitted_m": rep.fitted_m, "fitted_n": rep.fitted_n, "minimal_n": rep.minimal_n,
            "max_utilization": rep.max_utilization, "min_slack": rep.min_slack,
            "violations": rep.violations.len(),
        }),
    )?;
    Ok(out)
}

fn horizon(ctx: &RunContext<'_>) -> Result<RunOutput, CliError> {
    let Experiment::Horizon { search_hi, t_fractions, curve_points } = &ctx.config.experiment else { unreachable!() };
    let m = ctx.model()?;
    let kernels = m.kernels.build()?;
    let bm = BoundModel::birth_death(&kernels, m.m, m.lambda, m.n_hat);
    let scale = ctx.scale()?;
    let hi = search_hi.unwrap_or(16.0 * scale.alpha_s);
    let opt = optimal_terminal(scale.alpha_s, &bm, scale.nu, hi)?;
    let mut curve = Vec::with_capacity(*curve_points);
    for i in 1..=*curve_points {
        let beta = scale.alpha_s + (hi - scale.alpha_s) * i as f64 / *curve_points as f64;
        curve.push((beta, time_horizon(scale.alpha_s, beta, &bm, scale.nu)?));
    }
    let mut out = RunOutput::default();
    let mut t = Table::new(&["beta", "T"]);
    for &(b, v) in &curve {
        t.push(vec![Cell::Num(b), Cell::Num(v)]);
    }
    out.table(ctx, "horizon.csv", &t)?;
    out.plot(ctx, "plot_horizon.csv", &plotdata::horizon(&curve, (opt.beta, opt.t_max)))?;
    let mut loc = Table::new(&["fraction", "t_minus_s", "alpha", "residual"]);
    let mut worst = 0.0f64;
    for &f in t_fractions {
        let dt = f * opt.t_max;
        let alpha = localization_index(dt, 0.0, scale.alpha_s, &bm, scale.nu, hi)?;
        let res = if dt == 0.0 { 0.0 } else { (time_horizon(scale.alpha_s, alpha, &bm, scale.nu)? - dt).abs() };
        worst = worst.max(res);
        loc.push(vec![Cell::Num(f), Cell::Num(dt), Cell::Num(alpha), Cell::Num(res)]);
    }
    out.table(ctx, "localization.csv", &loc)?;
    out.check("unimodal", opt.unimodal(), format!("{} local maxima on the scan", opt.local_maxima));
    out.check("interior_optimum", !opt.at_boundary, format!("beta* = {:.9} in ({}, {hi}]", opt.beta, scale.alpha_s));
    out.check("localization_residual", worst <= LOCALIZATION_TOL, format!("max residual {worst:.3e}"));
    out.json(ctx, "summary.json", &json!({"beta_star": opt.beta, "t_max": opt.t_max, "search_hi": hi}))?;
    Ok(out)
}
