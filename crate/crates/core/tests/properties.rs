use proptest::collection::vec;
use proptest::prelude::*;

use ovskale_core::generators::{CorrelationVector, Hierarchy, ModelParams, OperatorKind};
use ovskale_core::kinetic::{convolve_dft, convolve_direct};
use ovskale_core::lattice::{
    e_lambda, k_inverse_all, k_transform_all, lp_integral, lp_pairing, KernelPair, KernelScale, KernelSpec,
    StateSpace, SupportedFunction, Torus,
};
use ovskale_core::scale::{norm_alpha, time_horizon, BoundModel};

fn small_space(sites: usize, n_max: usize) -> StateSpace {
    StateSpace::new(Torus::new(1, sites, 1.0 / sites as f64).unwrap(), n_max).unwrap()
}

fn hierarchy(sites: usize, n_max: usize, sigma: f64, mass: f64) -> Hierarchy {
    let t = Torus::new(1, sites, 1.0 / sites as f64).unwrap();
    let spec = KernelSpec::Gaussian { sigma, scale: KernelScale::Mass(mass) };
    let k = KernelPair::from_specs(t, &spec, &spec).unwrap();
    Hierarchy::new(StateSpace::new(t, n_max).unwrap(), k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mobius_round_trip(sites in 2usize..8, seed in vec(-1.0f64..1.0, 256)) {
        let sp = small_space(sites, sites);
        let g = SupportedFunction::from_values(&sp, sites, sp.full_mask(), seed[..sp.dim()].to_vec()).unwrap();
        let back = k_transform_all(&sp, &k_inverse_all(&sp, &g));
        for (a, b) in back.values().iter().zip(g.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_integral_is_linear(x in vec(-1.0f64..1.0, 64), y in vec(-1.0f64..1.0, 64), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let sp = small_space(6, 6);
        let gx = SupportedFunction::from_values(&sp, 6, sp.full_mask(), x).unwrap();
        let gy = SupportedFunction::from_values(&sp, 6, sp.full_mask(), y).unwrap();
        let mix = SupportedFunction::linear_combination(a, &gx, b, &gy);
        let lhs = lp_integral(&sp, &mix, 6);
        let rhs = a * lp_integral(&sp, &gx, 6) + b * lp_integral(&sp, &gy, 6);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn e_lambda_factorizes_over_disjoint_union(f in vec(-2.0f64..2.0, 8), mask in 0u64..256, extra in 0usize..8) {
        let sp = small_space(8, 8);
        let eta = sp.configuration(sp.index_of(mask).unwrap());
        if !eta.contains(extra) {
            let grown = eta.with(extra).unwrap();
            let lhs = e_lambda(|x| f[x], &grown);
            prop_assert!((lhs - f[extra] * e_lambda(|x| f[x], &eta)).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_decrease_in_alpha(values in vec(-1.0f64..1.0, 42), a in 1.0f64..3.0, d in 0.0f64..2.0) {
        let sp = small_space(6, 3);
        let k = CorrelationVector::from_values(&sp, values).unwrap();
        prop_assert!(norm_alpha(&sp, &k, a + d).unwrap() <= norm_alpha(&sp, &k, a).unwrap());
    }

    #[test]
    fn generator_is_linear(x in vec(-1.0f64..1.0, 42), y in vec(-1.0f64..1.0, 42), c in -2.0f64..2.0, eps in 0.0f64..1.0) {
        let h = hierarchy(6, 3, 0.2, 1.0);
        let p = ModelParams::new(1.0, 1.0, eps).unwrap();
        let sp = h.space();
        for kind in [OperatorKind::LTriangle, OperatorKind::LRen, OperatorKind::Z0] {
            let op = h.operator(kind, p);
            let kx = CorrelationVector::from_values(sp, x.clone()).unwrap();
            let ky = CorrelationVector::from_values(sp, y.clone()).unwrap();
            let mut mix = kx.clone();
            mix.axpy(c, &ky);
            let lhs = op.apply(&mix).unwrap();
            let mut rhs = op.apply(&kx).unwrap();
            rhs.axpy(c, &op.apply(&ky).unwrap());
            for (a, b) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn duality_holds_for_random_pairs(g in vec(-1.0f64..1.0, 42), k in vec(-1.0f64..1.0, 42), m in 0.0f64..2.0, lambda in 0.0f64..2.0, sigma in 0.1f64..0.5) {
        let h = hierarchy(6, 3, sigma, 1.0);
        let p = ModelParams::new(m, lambda, 1.0).unwrap();
        let sp = h.space();
        let gf = SupportedFunction::from_values(sp, 3, sp.full_mask(), g).unwrap();
        let kv = CorrelationVector::from_values(sp, k).unwrap();
        let l = h.operator(OperatorKind::LTriangle, p);
        let lhs = lp_pairing(sp, h.apply_l_hat(&gf, p).values(), kv.values());
        let rhs = lp_pairing(sp, gf.values(), l.apply(&kv).unwrap().values());
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn convolution_paths_agree(sites in 2usize..40, rho in vec(0.0f64..2.0, 40), sigma in 0.05f64..0.5) {
        let t = Torus::new(1, sites, 1.0 / sites as f64).unwrap();
        let kernel = KernelSpec::Gaussian { sigma, scale: KernelScale::Mass(1.0) }.tabulate(&t).unwrap();
        let a = convolve_direct(&t, &kernel, &rho[..sites]);
        let b = convolve_dft(&t, &kernel, &rho[..sites]);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn horizon_shrinks_as_it_starts_later(a in 1.0f64..1.5, gap in 0.05f64..0.4, shift in 0.0f64..0.3) {
        let h = hierarchy(6, 3, 0.2, 1.0);
        let b = BoundModel::birth_death(h.kernels(), 1.0, 1.0, 1e-6);
        let beta = a + gap + shift;
        let t1 = time_horizon(a, beta, &b, 1.0).unwrap();
        let t2 = time_horizon(a + shift, beta, &b, 1.0).unwrap();
        prop_assert!(t2 <= t1 * (1.0 + 1e-12));
    }
}
