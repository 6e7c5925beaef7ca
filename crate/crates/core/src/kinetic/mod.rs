//! The nonlocal kinetic equation
//! `∂ρ/∂t = −ρ(a∗ρ) − mρ e^{−(φ∗ρ)} + λ`
//! on the torus, its spatially homogeneous reduction and its stationary points.

pub mod bifurcation;
pub mod convolution;

use alloc::vec::Vec;

use crate::generators::ModelParams;
use crate::lattice::KernelPair;
use crate::math::exp;
use crate::ode::{dopri45, rk4_step, Tolerance};
use crate::{Error, Result};

pub use convolution::{convolve, convolve_dft, convolve_direct};

/// Maximum number of step halvings within one step of [`integrate_ke`].
pub const MAX_HALVINGS: usize = 20;

/// A nonnegative density over the torus sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: "densities must be finite and nonnegative",
            });
        }
        Ok(DensityField { values })
    }

    pub fn constant(sites: usize, r: f64) -> Result<Self> {
        DensityField::new(alloc::vec![r; sites])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn rhs_raw(rho: &[f64], kernels: &KernelPair, params: &ModelParams, out: &mut [f64]) {
    let t = kernels.torus();
    let ca = convolve(t, kernels.a_values(), rho);
    let cp = convolve(t, kernels.phi_values(), rho);
    for i in 0..rho.len() {
        out[i] = -rho[i] * ca[i] - params.m * rho[i] * exp(-cp[i]) + params.lambda;
    }
}

/// The right-hand side at `ρ`; entries may be negative.
pub fn rhs_ke(rho: &DensityField, kernels: &KernelPair, params: &ModelParams) -> Result<Vec<f64>> {
    check_len(rho, kernels)?;
    let mut out = alloc::vec![0.0; rho.len()];
    rhs_raw(rho.values(), kernels, params, &mut out);
    Ok(out)
}

fn check_len(rho: &DensityField, kernels: &KernelPair) -> Result<()> {
    let s = kernels.torus().site_count();
    if rho.len() != s {
        return Err(Error::ShapeMismatch { expected: s, found: rho.len(), what: "density length" });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<DensityField>,
    /// Steps that needed at least one halving.
    pub rejected_steps: usize,
}

impl KineticTrajectory {
    pub fn final_field(&self) -> &DensityField {
        self.fields.last().expect("trajectory is never empty")
    }
}

/// Classical RK4 with nominal step `dt`. A step is retried with half the
/// step while the result has a negative entry or
/// `dt·(⟨a⟩ max ρ + m) ≥ 1`; after [`MAX_HALVINGS`] failures the run stops.
pub fn integrate_ke(
    rho0: &DensityField,
    kernels: &KernelPair,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
) -> Result<KineticTrajectory> {
    check_len(rho0, kernels)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter { name: "t_end", reason: "must be nonnegative" });
    }
    let avg_a = kernels.avg_a();
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| rhs_raw(y, kernels, params, dy);
    let mut t = 0.0;
    let mut y = rho0.values().to_vec();
    let mut times = alloc::vec![0.0];
    let mut fields = alloc::vec![rho0.clone()];
    let mut rejected_steps = 0;
    let n_steps = libm::ceil(t_end / dt - 1e-9).max(0.0) as usize;
    for step in 0..n_steps {
        let target = if step + 1 == n_steps { t_end } else { (step + 1) as f64 * dt };
        let mut halvings = 0;
        let mut rejected = false;
        // the nominal step may be completed by several reduced substeps
        while t < target {
            let mut h = (target - t).min(dt / libm::pow(2.0, halvings as f64));
            loop {
                let max_rho = y.iter().copied().fold(0.0, f64::max);
                let stable = h * (avg_a * max_rho + params.m) < 1.0;
                let cand = if stable { Some(rk4_step(&mut f, t, &y, h)) } else { None };
                match cand {
                    Some(next) if next.iter().all(|v| *v >= 0.0 && v.is_finite()) => {
                        y = next;
                        t = if target - t <= h { target } else { t + h };
                        break;
                    }
                    _ => {
                        rejected = true;
                        halvings += 1;
                        if halvings > MAX_HALVINGS {
                            return Err(Error::StepCollapse { time: t, step: h });
                        }
                        h *= 0.5;
                    }
                }
            }
        }
        if rejected {
            rejected_steps += 1;
        }
        times.push(t);
        fields.push(DensityField { values: y.clone() });
    }
    Ok(KineticTrajectory { times, fields, rejected_steps })
}

/// Rates of the homogeneous reduction `r′ = −⟨a⟩r² − m r e^{−⟨φ⟩r} + λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousModel {
    pub avg_a: f64,
    pub m: f64,
    pub avg_phi: f64,
    pub lambda: f64,
}

impl HomogeneousModel {
    pub fn from_kernels(kernels: &KernelPair, params: &ModelParams) -> Self {
        HomogeneousModel { avg_a: kernels.avg_a(), m: params.m, avg_phi: kernels.avg_phi(), lambda: params.lambda }
    }

    pub fn rhs(&self, r: f64) -> f64 {
        -self.avg_a * r * r - self.m * r * exp(-self.avg_phi * r) + self.lambda
    }
}

/// `r(t_end)` by adaptive Dormand–Prince with local tolerance `1e−12`.
pub fn homogeneous_ode(model: &HomogeneousModel, r0: f64, t_end: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Error::InvalidParameter { name: "r0", reason: "must be finite and nonnegative" });
    }
    let y = dopri45(|_, y, dy| dy[0] = model.rhs(y[0]), 0.0, &[r0], t_end, Tolerance::new(1e-12, 1e-12))?;
    Ok(y[0])
}
