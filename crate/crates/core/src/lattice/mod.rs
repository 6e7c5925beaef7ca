//! Finite configurations over a periodic lattice.
//!
//! The continuum `ℝ^d` is replaced by a torus of `M^d` sites with spacing `h`;
//! every `∫·dx` becomes `h^d Σ_sites`. A configuration is a set of distinct
//! sites, stored canonically as a strictly increasing site list (and, inside
//! [`StateSpace`], as a bit mask).

mod calculus;
mod space;

pub use calculus::{
    e_lambda, energy_a, energy_phi, k_inverse, k_inverse_all, k_transform, k_transform_all,
    lp_integral, lp_pairing, MAX_SUBSET_SIZE,
};
pub use space::{StateSpace, SupportedFunction, MAX_HIERARCHY_SITES, MAX_STATES};

use alloc::vec::Vec;

use crate::math::{exp, sqrt};
use crate::{Error, Result};

/// Periodic lattice `(ℤ/Mℤ)^d` with spacing `h`.
///
/// Sites are numbered `Σ_i c_i M^i` for coordinates `c_i ∈ [0, M)`; the same
/// numbering indexes difference vectors, so kernel tables have `M^d` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    dim: usize,
    sites_per_axis: usize,
    spacing: f64,
    site_count: usize,
}

impl Torus {
    pub fn new(dim: usize, sites_per_axis: usize, spacing: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dim", reason: "must be positive" });
        }
        if sites_per_axis == 0 {
            return Err(Error::InvalidParameter { name: "sites", reason: "must be positive" });
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter {
                name: "spacing",
                reason: "must be finite and positive",
            });
        }
        let mut site_count: usize = 1;
        for _ in 0..dim {
            site_count = site_count.checked_mul(sites_per_axis).ok_or(Error::InvalidParameter {
                name: "sites",
                reason: "site count overflows",
            })?;
        }
        Ok(Torus { dim, sites_per_axis, spacing, site_count })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites_per_axis(&self) -> usize {
        self.sites_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `S = M^d`.
    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// `h^d`, the quadrature weight of one site.
    pub fn cell_volume(&self) -> f64 {
        crate::math::powi(self.spacing, self.dim as i32)
    }

    /// Coordinate of `site` along `axis`.
    #[inline]
    pub fn coord(&self, site: usize, axis: usize) -> usize {
        let mut s = site;
        for _ in 0..axis {
            s /= self.sites_per_axis;
        }
        s % self.sites_per_axis
    }

    /// Index of the difference vector `x − y`, taken modulo the period.
    #[inline]
    pub fn difference(&self, x: usize, y: usize) -> usize {
        let m = self.sites_per_axis;
        let (mut xs, mut ys) = (x, y);
        let mut idx = 0;
        let mut stride = 1;
        for _ in 0..self.dim {
            let cx = xs % m;
            let cy = ys % m;
            xs /= m;
            ys /= m;
            idx += ((cx + m - cy) % m) * stride;
            stride *= m;
        }
        idx
    }

    /// Index of `−v` for a difference-vector index `v`.
    pub fn negate(&self, v: usize) -> usize {
        self.difference(0, v)
    }

    /// Squared length of the minimal-image representative of difference `v`.
    pub fn displacement_sq(&self, v: usize) -> f64 {
        let m = self.sites_per_axis as i64;
        let mut s = v;
        let mut acc = 0.0;
        for _ in 0..self.dim {
            let c = (s % self.sites_per_axis) as i64;
            s /= self.sites_per_axis;
            let c = if 2 * c > m { c - m } else { c };
            let x = c as f64 * self.spacing;
            acc += x * x;
        }
        acc
    }
}

/// A finite configuration: strictly increasing, repetition-free site list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration(Vec<usize>);

impl Configuration {
    pub fn empty() -> Self {
        Configuration(Vec::new())
    }

    /// Canonicalizes `sites` (sorts); repeated sites are rejected.
    pub fn new(mut sites: Vec<usize>) -> Result<Self> {
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter {
                name: "configuration",
                reason: "repeated site (configurations are simple)",
            });
        }
        Ok(Configuration(sites))
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut sites = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            sites.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        Configuration(sites)
    }

    /// Bit mask of the sites; `None` if a site index is 64 or larger.
    pub fn mask(&self) -> Option<u64> {
        self.0
            .iter()
            .try_fold(0u64, |acc, &s| if s < 64 { Some(acc | (1u64 << s)) } else { None })
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    /// `η ∪ {x}`; returns `None` if `x ∈ η`.
    pub fn with(&self, site: usize) -> Option<Self> {
        match self.0.binary_search(&site) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, site);
                Some(Configuration(v))
            }
        }
    }

    /// `η ∖ {x}` (unchanged if `x ∉ η`).
    pub fn without(&self, site: usize) -> Self {
        Configuration(self.0.iter().copied().filter(|&s| s != site).collect())
    }
}

/// How a parametric kernel is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelScale {
    /// Peak value multiplies the unit-height profile.
    Amplitude(f64),
    /// The profile is rescaled so that `h^d Σ_x k(x)` equals this mass.
    Mass(f64),
}

/// Kernel description, tabulated on a torus by [`KernelSpec::tabulate`].
///
/// Parametric shapes are evaluated on the minimal-image displacement and the
/// entry at the zero displacement is set to 0: on the lattice a particle never
/// interacts with its own site, which keeps `h^d Σ k` equal to the integral
/// seen by the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Gaussian { sigma: f64, scale: KernelScale },
    TopHat { radius: f64, scale: KernelScale },
    /// Values in difference-vector order, used verbatim.
    Table(Vec<f64>),
}

impl KernelSpec {
    pub fn zero() -> Self {
        KernelSpec::TopHat { radius: 0.0, scale: KernelScale::Amplitude(0.0) }
    }

    pub fn tabulate(&self, torus: &Torus) -> Result<Vec<f64>> {
        let s = torus.site_count();
        let (profile, scale): (Vec<f64>, KernelScale) = match self {
            KernelSpec::Table(values) => {
                if values.len() != s {
                    return Err(Error::ShapeMismatch {
                        expected: s,
                        found: values.len(),
                        what: "kernel table length",
                    });
                }
                return Ok(values.clone());
            }
            KernelSpec::Gaussian { sigma, scale } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: "must be finite and positive",
                    });
                }
                let two_var = 2.0 * sigma * sigma;
                let p = (0..s)
                    .map(|v| if v == 0 { 0.0 } else { exp(-torus.displacement_sq(v) / two_var) })
                    .collect();
                (p, *scale)
            }
            KernelSpec::TopHat { radius, scale } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "radius",
                        reason: "must be finite and nonnegative",
                    });
                }
                let tol = 1e-9 * torus.spacing();
                let p = (0..s)
                    .map(|v| {
                        if v != 0 && sqrt(torus.displacement_sq(v)) <= radius + tol {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (p, *scale)
            }
        };
        match scale {
            KernelScale::Amplitude(amp) => Ok(profile.into_iter().map(|p| amp * p).collect()),
            KernelScale::Mass(mass) => {
                let total: f64 = torus.cell_volume() * profile.iter().sum::<f64>();
                if mass == 0.0 {
                    return Ok(alloc::vec![0.0; s]);
                }
                if total <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "kernel",
                        reason: "profile has no mass on this lattice",
                    });
                }
                Ok(profile.into_iter().map(|p| p * mass / total).collect())
            }
        }
    }
}

/// The interaction kernels `a` (competition) and `φ` (death-rate modulation)
/// tabulated by difference vector, with their integrals and suprema.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    torus: Torus,
    a: Vec<f64>,
    phi: Vec<f64>,
    avg_a: f64,
    sup_a: f64,
    avg_phi: f64,
    sup_phi: f64,
}

impl KernelPair {
    pub fn new(torus: Torus, a: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let s = torus.site_count();
        for (vals, what) in [(&a, "a"), (&phi, "phi")] {
            if vals.len() != s {
                return Err(Error::ShapeMismatch { expected: s, found: vals.len(), what });
            }
            if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter {
                    name: what,
                    reason: "kernel values must be finite and nonnegative",
                });
            }
            for v in 0..s {
                let w = torus.negate(v);
                let (x, y) = (vals[v], vals[w]);
                if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                    return Err(Error::InvalidParameter {
                        name: what,
                        reason: "kernel must be symmetric under x -> -x",
                    });
                }
            }
        }
        let vol = torus.cell_volume();
        let sup = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
        Ok(KernelPair {
            torus,
            avg_a: vol * a.iter().sum::<f64>(),
            sup_a: sup(&a),
            avg_phi: vol * phi.iter().sum::<f64>(),
            sup_phi: sup(&phi),
            a,
            phi,
        })
    }

    pub fn from_specs(torus: Torus, a: &KernelSpec, phi: &KernelSpec) -> Result<Self> {
        KernelPair::new(torus, a.tabulate(&torus)?, phi.tabulate(&torus)?)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    /// `a(x − y)` with periodic differences.
    #[inline]
    pub fn a(&self, x: usize, y: usize) -> f64 {
        self.a[self.torus.difference(x, y)]
    }

    /// `φ(x − y)` with periodic differences.
    #[inline]
    pub fn phi(&self, x: usize, y: usize) -> f64 {
        self.phi[self.torus.difference(x, y)]
    }

    /// `⟨a⟩ = h^d Σ a`.
    pub fn avg_a(&self) -> f64 {
        self.avg_a
    }

    /// `ā = max a`.
    pub fn sup_a(&self) -> f64 {
        self.sup_a
    }

    /// `⟨φ⟩ = h^d Σ φ`.
    pub fn avg_phi(&self) -> f64 {
        self.avg_phi
    }

    /// `φ̄ = max φ`.
    pub fn sup_phi(&self) -> f64 {
        self.sup_phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn torus_rejects_degenerate_geometry() {
        assert!(Torus::new(0, 4, 1.0).is_err());
        assert!(Torus::new(1, 0, 1.0).is_err());
        assert!(Torus::new(1, 4, 0.0).is_err());
        assert!(Torus::new(1, 4, f64::NAN).is_err());
    }

    #[test]
    fn differences_are_periodic() {
        let t = Torus::new(2, 4, 0.5).unwrap();
        assert_eq!(t.site_count(), 16);
        // (1,0) − (3,0) = (2,0)
        assert_eq!(t.difference(1, 3), 2);
        // (0,1) − (0,2) = (0,3)
        assert_eq!(t.difference(4, 8), 12);
        for v in 0..16 {
            assert_eq!(t.negate(t.negate(v)), v);
            assert!((t.displacement_sq(v) - t.displacement_sq(t.negate(v))).abs() < 1e-15);
        }
        // minimal image: coordinate 3 on a 4-periodic axis is distance 1
        assert!((t.displacement_sq(3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn configuration_is_canonical() {
        let c = Configuration::new(vec![5, 1, 3]).unwrap();
        assert_eq!(c.sites(), &[1, 3, 5]);
        assert!(Configuration::new(vec![2, 2]).is_err());
        assert_eq!(Configuration::from_mask(c.mask().unwrap()), c);
        assert!(c.with(3).is_none());
        assert_eq!(c.with(0).unwrap().sites(), &[0, 1, 3, 5]);
        assert_eq!(c.without(3).sites(), &[1, 5]);
    }

    #[test]
    fn mass_normalized_kernels() {
        let t = Torus::new(1, 8, 0.125).unwrap();
        let spec = KernelSpec::Gaussian { sigma: 0.2, scale: KernelScale::Mass(1.5) };
        let k = KernelPair::from_specs(t, &spec, &KernelSpec::zero()).unwrap();
        assert!((k.avg_a() - 1.5).abs() < 1e-14);
        assert_eq!(k.a_values()[0], 0.0);
        assert_eq!(k.avg_phi(), 0.0);
        let hat = KernelSpec::TopHat { radius: 0.25, scale: KernelScale::Amplitude(2.0) };
        let vals = hat.tabulate(&t).unwrap();
        assert_eq!(vals, vec![0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn kernel_validation() {
        let t = Torus::new(1, 4, 1.0).unwrap();
        let asym = vec![0.0, 1.0, 0.0, 0.5];
        assert!(KernelPair::new(t, asym, vec![0.0; 4]).is_err());
        assert!(KernelPair::new(t, vec![0.0, -1.0, 0.0, -1.0], vec![0.0; 4]).is_err());
        assert!(KernelPair::new(t, vec![0.0; 3], vec![0.0; 4]).is_err());
        let k = KernelPair::new(t, vec![0.0, 1.0, 3.0, 1.0], vec![0.0, 2.0, 0.0, 2.0]).unwrap();
        assert_eq!(k.sup_a(), 3.0);
        assert_eq!(k.avg_a(), 5.0);
        assert_eq!(k.sup_phi(), 2.0);
        assert_eq!(k.a(0, 2), 3.0);
    }
}
