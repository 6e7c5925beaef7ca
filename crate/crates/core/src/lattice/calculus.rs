//! Lebesgue–Poisson integration and the K-transform calculus.
//!
//! Convention: the `n`-point layer of the Lebesgue–Poisson integral carries
//! `1/n!` on ordered tuples, i.e. it is `h^{dn}` times the plain sum over
//! unordered `n`-subsets. Every operator in the crate uses this convention.

use super::{Configuration, KernelPair, StateSpace, SupportedFunction};
use crate::math::powi;
use crate::{Error, Result};

/// Largest configuration accepted by the subset-sum transforms.
pub const MAX_SUBSET_SIZE: usize = 25;

/// `∫_{Γ_0} G dη` truncated to layers `n ≤ n_max`.
pub fn lp_integral(space: &StateSpace, g: &SupportedFunction, n_max: usize) -> f64 {
    lp_integral_values(space, g.values(), n_max)
}

pub(crate) fn lp_integral_values(space: &StateSpace, values: &[f64], n_max: usize) -> f64 {
    let vol = space.torus().cell_volume();
    (0..=n_max.min(space.n_max()))
        .map(|n| powi(vol, n as i32) * values[space.layer(n)].iter().sum::<f64>())
        .sum()
}

/// `∫_{Γ_0} G(η) k(η) dη` over all stored layers, for two value vectors laid
/// out on `space`.
pub fn lp_pairing(space: &StateSpace, g: &[f64], k: &[f64]) -> f64 {
    let vol = space.torus().cell_volume();
    (0..=space.n_max())
        .map(|n| {
            let r = space.layer(n);
            let s: f64 = g[r.clone()].iter().zip(&k[r]).map(|(a, b)| a * b).sum();
            powi(vol, n as i32) * s
        })
        .sum()
}

/// `e_λ(f, η) = Π_{x∈η} f(x)`, with `e_λ(f, ∅) = 1`.
pub fn e_lambda<F: Fn(usize) -> f64>(f: F, eta: &Configuration) -> f64 {
    eta.sites().iter().map(|&x| f(x)).product()
}

fn subset_guard(eta: &Configuration) -> Result<u64> {
    if eta.len() > MAX_SUBSET_SIZE {
        return Err(Error::SubsetBlowup { size: eta.len(), limit: MAX_SUBSET_SIZE });
    }
    eta.mask().ok_or(Error::InvalidParameter {
        name: "configuration",
        reason: "site index outside the 64-site range",
    })
}

/// `(KG)(η) = Σ_{ξ⊂η} G(ξ)`.
pub fn k_transform(space: &StateSpace, g: &SupportedFunction, eta: &Configuration) -> Result<f64> {
    let mask = subset_guard(eta)?;
    Ok(submask_sum(mask, |sub| g.value_by_mask(space, sub)))
}

/// `(K⁻¹F)(η) = Σ_{ξ⊂η} (−1)^{|η∖ξ|} F(ξ)`.
pub fn k_inverse(space: &StateSpace, f: &SupportedFunction, eta: &Configuration) -> Result<f64> {
    let mask = subset_guard(eta)?;
    let n = mask.count_ones();
    Ok(submask_sum(mask, |sub| {
        let sign = if (n - sub.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        sign * f.value_by_mask(space, sub)
    }))
}

/// `KG` on every stored configuration.
pub fn k_transform_all(space: &StateSpace, g: &SupportedFunction) -> SupportedFunction {
    SupportedFunction::from_fn(space, space.n_max(), space.full_mask(), |eta| {
        k_transform(space, g, eta).expect("stored configurations are within the subset guard")
    })
}

/// `K⁻¹F` on every stored configuration.
pub fn k_inverse_all(space: &StateSpace, f: &SupportedFunction) -> SupportedFunction {
    SupportedFunction::from_fn(space, space.n_max(), space.full_mask(), |eta| {
        k_inverse(space, f, eta).expect("stored configurations are within the subset guard")
    })
}

fn submask_sum<F: FnMut(u64) -> f64>(mask: u64, mut f: F) -> f64 {
    let mut acc = 0.0;
    let mut sub = mask;
    loop {
        acc += f(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    acc
}

/// `E^a(η) = Σ_{x∈η} Σ_{y∈η∖x} a(x−y)`.
pub fn energy_a(eta: &Configuration, kernels: &KernelPair) -> f64 {
    let s = eta.sites();
    let mut e = 0.0;
    for (i, &x) in s.iter().enumerate() {
        for &y in &s[i + 1..] {
            e += kernels.a(x, y) + kernels.a(y, x);
        }
    }
    e
}

/// `E^φ(x, ξ) = Σ_{y∈ξ} φ(x−y)`; the caller passes `ξ = η∖x`.
pub fn energy_phi(x: usize, xi: &Configuration, kernels: &KernelPair) -> f64 {
    xi.sites().iter().map(|&y| kernels.phi(x, y)).sum()
}
