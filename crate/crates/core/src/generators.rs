//! The hierarchy generator on truncated correlation vectors.
//!
//! For `k` stored on layers `n ≤ N_max`,
//!
//! ```text
//! (L^Δ k)(η) = −E^a(η) k(η)
//!            − Σ_{y∈η} h^d Σ_{x∉η} a(x−y) k(η∪x)
//!            − m Σ_{x∈η} e^{−E^φ(x,η∖x)} ∫ k(η∪ξ) e_λ(e^{−φ(x−·)}−1, ξ) dξ
//!            + λ Σ_{x∈η} k(η∖x)
//! ```
//!
//! where `ξ` runs over configurations disjoint from `η` with
//! `|ξ| ≤ N_max − |η|` and every reference above `N_max` reads zero. `A` is
//! the first (diagonal) term, `Z` the other three. The Vlasov-rescaled family
//! replaces `E^a` by `εE^a`, `E^φ` by `εE^φ` and `e^{−φ}−1` by
//! `(e^{−εφ}−1)/ε`; at `ε = 0` the last factor becomes `−φ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::lattice::{energy_a, Configuration, KernelPair, StateSpace, SupportedFunction};
use crate::math::{exp, expm1, powi};
use crate::{Error, Result};

/// Cap on the dense dimension accepted by [`OperatorHandle::assemble_dense`].
pub const DENSE_CAP: usize = 20_000;

/// A correlation function truncated to layers `0..=N_max`, stored in the flat
/// layout of a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    sites: usize,
    n_max: usize,
    data: Vec<f64>,
}

impl CorrelationVector {
    pub fn zeros(space: &StateSpace) -> Self {
        CorrelationVector { sites: space.sites(), n_max: space.n_max(), data: vec![0.0; space.dim()] }
    }

    pub fn from_values(space: &StateSpace, data: Vec<f64>) -> Result<Self> {
        if data.len() != space.dim() {
            return Err(Error::ShapeMismatch {
                expected: space.dim(),
                found: data.len(),
                what: "correlation vector length",
            });
        }
        Ok(CorrelationVector { sites: space.sites(), n_max: space.n_max(), data })
    }

    /// Builds from per-layer arrays in canonical (lexicographic) order.
    pub fn from_layers(space: &StateSpace, layers: &[Vec<f64>]) -> Result<Self> {
        if layers.len() != space.n_max() + 1 {
            return Err(Error::ShapeMismatch {
                expected: space.n_max() + 1,
                found: layers.len(),
                what: "number of layers",
            });
        }
        let mut data = Vec::with_capacity(space.dim());
        for (n, layer) in layers.iter().enumerate() {
            let want = space.layer(n).len();
            if layer.len() != want {
                return Err(Error::ShapeMismatch {
                    expected: want,
                    found: layer.len(),
                    what: "layer length",
                });
            }
            data.extend_from_slice(layer);
        }
        CorrelationVector::from_values(space, data)
    }

    pub fn from_fn<F: FnMut(&Configuration) -> f64>(space: &StateSpace, mut f: F) -> Self {
        let data = (0..space.dim()).map(|i| f(&space.configuration(i))).collect();
        CorrelationVector { sites: space.sites(), n_max: space.n_max(), data }
    }

    /// `k(η) = e_λ(ρ, η) = Π_{x∈η} ρ(x)`.
    pub fn product_form(space: &StateSpace, rho: &[f64]) -> Result<Self> {
        if rho.len() != space.sites() {
            return Err(Error::ShapeMismatch {
                expected: space.sites(),
                found: rho.len(),
                what: "density length",
            });
        }
        Ok(CorrelationVector::from_fn(space, |c| c.sites().iter().map(|&x| rho[x]).product()))
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn layer<'a>(&'a self, space: &StateSpace, n: usize) -> &'a [f64] {
        &self.data[space.layer(n)]
    }

    pub fn check_space(&self, space: &StateSpace) -> Result<()> {
        if self.sites != space.sites() || self.n_max != space.n_max() || self.data.len() != space.dim()
        {
            return Err(Error::ShapeMismatch {
                expected: space.dim(),
                found: self.data.len(),
                what: "correlation vector does not match the state space",
            });
        }
        Ok(())
    }

    /// `self − other`, entrywise.
    pub fn difference(&self, other: &Self) -> Self {
        CorrelationVector {
            sites: self.sites,
            n_max: self.n_max,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        CorrelationVector {
            sites: self.sites,
            n_max: self.n_max,
            data: self.data.iter().map(|a| c * a).collect(),
        }
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }
}

/// Rates of the birth-and-death model.
///
/// The theory asks for `m, λ > 0`; zero rates are accepted so that degenerate
/// sanity cases (pure birth, frozen dynamics) run through the same code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(m: f64, lambda: f64, epsilon: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::InvalidParameter { name: "m", reason: "must be finite and >= 0" });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: "must be finite and >= 0",
            });
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be finite and >= 0",
            });
        }
        Ok(ModelParams { m, lambda, epsilon })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        ModelParams::new(self.m, self.lambda, epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `−E^a`, diagonal.
    A,
    /// `L^Δ − A`.
    Z,
    /// `−εE^a`; zero at `ε = 0`.
    AEps,
    /// `L^Δ_{ε,ren} − A_ε`; equals `Z_0` at `ε = 0`.
    ZEps,
    /// The `ε → 0` limit of `Z_ε`.
    Z0,
    LTriangle,
    /// `L^Δ_{ε,ren}`; equals `Z_0` at `ε = 0`.
    LRen,
}

/// Which of the four generator terms an operator carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub energy: bool,
    pub jump: bool,
    pub death: bool,
    pub birth: bool,
}

impl Terms {
    pub const ALL: Terms = Terms { energy: true, jump: true, death: true, birth: true };
    pub const OFF_DIAGONAL: Terms = Terms { energy: false, jump: true, death: true, birth: true };
    pub const ENERGY: Terms = Terms { energy: true, jump: false, death: false, birth: false };
    pub const NONE: Terms = Terms { energy: false, jump: false, death: false, birth: false };
}

/// A torus with its truncated state space and kernels, plus the tables every
/// operator reads (pair kernels, per-state energies).
#[derive(Debug, Clone)]
pub struct Hierarchy {
    space: StateSpace,
    kernels: KernelPair,
    a_pair: Vec<f64>,
    phi_pair: Vec<f64>,
    energy: Vec<f64>,
}

impl Hierarchy {
    pub fn new(space: StateSpace, kernels: KernelPair) -> Result<Self> {
        if space.torus() != kernels.torus() {
            return Err(Error::InvalidParameter {
                name: "kernels",
                reason: "kernels are tabulated on a different torus",
            });
        }
        let s = space.sites();
        let mut a_pair = vec![0.0; s * s];
        let mut phi_pair = vec![0.0; s * s];
        for x in 0..s {
            for y in 0..s {
                a_pair[x * s + y] = kernels.a(x, y);
                phi_pair[x * s + y] = kernels.phi(x, y);
            }
        }
        let energy = (0..space.dim()).map(|i| energy_a(&space.configuration(i), &kernels)).collect();
        Ok(Hierarchy { space, kernels, a_pair, phi_pair, energy })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn kernels(&self) -> &KernelPair {
        &self.kernels
    }

    /// `E^a(η)` for every stored configuration.
    pub fn energies(&self) -> &[f64] {
        &self.energy
    }

    pub fn operator(&self, kind: OperatorKind, params: ModelParams) -> OperatorHandle<'_> {
        let eps = params.epsilon;
        let (terms, diag, death) = match kind {
            OperatorKind::A => (Terms::ENERGY, 1.0, DeathScaling::Scaled(1.0)),
            OperatorKind::Z => (Terms::OFF_DIAGONAL, 1.0, DeathScaling::Scaled(1.0)),
            OperatorKind::LTriangle => (Terms::ALL, 1.0, DeathScaling::Scaled(1.0)),
            OperatorKind::AEps => (Terms::ENERGY, eps, DeathScaling::for_epsilon(eps)),
            OperatorKind::ZEps => (Terms::OFF_DIAGONAL, eps, DeathScaling::for_epsilon(eps)),
            OperatorKind::LRen => (Terms::ALL, eps, DeathScaling::for_epsilon(eps)),
            OperatorKind::Z0 => (Terms::OFF_DIAGONAL, 0.0, DeathScaling::Limit),
        };
        let s = self.space.sites();
        let factor = self
            .phi_pair
            .iter()
            .map(|&p| match death {
                DeathScaling::Scaled(e) => expm1(-e * p) / e,
                DeathScaling::Limit => -p,
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(factor.len(), s * s);
        OperatorHandle { hierarchy: self, kind, params, terms, diag, death, factor }
    }

    /// The pre-dual generator `L̂` on quasi-observables (unscaled model).
    ///
    /// The result is stored up to `N_max` on the whole torus: the death term
    /// spreads support beyond the window of `g` and raises its order.
    pub fn apply_l_hat(&self, g: &SupportedFunction, params: ModelParams) -> SupportedFunction {
        let sp = &self.space;
        let s = sp.sites();
        let vol = sp.torus().cell_volume();
        let n_max = sp.n_max();
        let full = sp.full_mask();
        let gval = |mask: u64| g.value_by_mask(sp, mask);
        let mut out = vec![0.0; sp.dim()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mask = sp.mask(idx);
            let n = mask.count_ones() as usize;
            let mut acc = -self.energy[idx] * g.at(idx);
            for x in bits(mask) {
                let w: f64 = bits(mask & !(1 << x)).map(|y| self.a_pair[x * s + y]).sum();
                if w != 0.0 {
                    acc -= w * gval(mask & !(1 << x));
                }
            }
            if params.m != 0.0 {
                let mut death = 0.0;
                let mut sub = mask;
                while sub != 0 {
                    let gv = gval(sub);
                    if gv != 0.0 {
                        let rest = mask & !sub;
                        let mut inner = 0.0;
                        for x in bits(sub) {
                            let e_phi: f64 =
                                bits(sub & !(1 << x)).map(|y| self.phi_pair[x * s + y]).sum();
                            let prod: f64 =
                                bits(rest).map(|z| expm1(-self.phi_pair[x * s + z])).product();
                            inner += exp(-e_phi) * prod;
                        }
                        death += gv * inner;
                    }
                    sub = (sub - 1) & mask;
                }
                acc -= params.m * death;
            }
            if n < n_max && params.lambda != 0.0 {
                let birth: f64 = bits(full & !mask).map(|x| gval(mask | (1 << x))).sum();
                acc += params.lambda * vol * birth;
            }
            *slot = acc;
        }
        SupportedFunction::from_values(sp, n_max, full, out)
            .expect("output is stored on the full truncated space")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DeathScaling {
    Scaled(f64),
    Limit,
}

impl DeathScaling {
    fn for_epsilon(eps: f64) -> Self {
        if eps == 0.0 {
            DeathScaling::Limit
        } else {
            DeathScaling::Scaled(eps)
        }
    }
}

/// One operator of the family bound to a [`Hierarchy`] and fixed rates.
#[derive(Debug, Clone)]
pub struct OperatorHandle<'a> {
    hierarchy: &'a Hierarchy,
    kind: OperatorKind,
    params: ModelParams,
    terms: Terms,
    diag: f64,
    death: DeathScaling,
    /// `(e^{−εφ(x−z)}−1)/ε` (or `−φ(x−z)`) at `x·S + z`.
    factor: Vec<f64>,
}

impl<'a> OperatorHandle<'a> {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn terms(&self) -> Terms {
        self.terms
    }

    pub fn hierarchy(&self) -> &'a Hierarchy {
        self.hierarchy
    }

    pub fn space(&self) -> &'a StateSpace {
        &self.hierarchy.space
    }

    pub fn dim(&self) -> usize {
        self.hierarchy.space.dim()
    }

    /// Restricts the operator to a subset of its terms.
    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = Terms {
            energy: self.terms.energy && terms.energy,
            jump: self.terms.jump && terms.jump,
            death: self.terms.death && terms.death,
            birth: self.terms.birth && terms.birth,
        };
        self
    }

    /// Diagonal entries if the operator is diagonal (energy term only).
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        let t = self.terms;
        if t.jump || t.death || t.birth {
            return None;
        }
        let scale = if t.energy { -self.diag } else { 0.0 };
        Some(self.hierarchy.energy.iter().map(|e| scale * e).collect())
    }

    pub fn apply(&self, k: &CorrelationVector) -> Result<CorrelationVector> {
        k.check_space(&self.hierarchy.space)?;
        let mut out = CorrelationVector::zeros(&self.hierarchy.space);
        self.apply_into(k.values(), out.values_mut());
        Ok(out)
    }

    /// Matrix-free application on raw vectors in the state-space layout.
    pub fn apply_into(&self, k: &[f64], out: &mut [f64]) {
        let h = self.hierarchy;
        let sp = &h.space;
        assert_eq!(k.len(), sp.dim());
        assert_eq!(out.len(), sp.dim());
        let s = sp.sites();
        let n_max = sp.n_max();
        let vol = sp.torus().cell_volume();
        let full = sp.full_mask();
        let ModelParams { m, lambda, .. } = self.params;
        let t = self.terms;
        let mut scratch = DeathScratch::new(n_max);

        for (idx, slot) in out.iter_mut().enumerate() {
            let mask = sp.mask(idx);
            let n = mask.count_ones() as usize;
            let mut acc = 0.0;
            if t.energy && self.diag != 0.0 {
                acc -= self.diag * h.energy[idx] * k[idx];
            }
            if t.jump && n < n_max {
                let mut jump = 0.0;
                for x in bits(full & !mask) {
                    let w: f64 = bits(mask).map(|y| h.a_pair[x * s + y]).sum();
                    if w != 0.0 {
                        jump += w * k[index(sp, mask | (1 << x))];
                    }
                }
                acc -= vol * jump;
            }
            if t.birth && n > 0 && lambda != 0.0 {
                let birth: f64 = bits(mask).map(|x| k[index(sp, mask & !(1 << x))]).sum();
                acc += lambda * birth;
            }
            if t.death && n > 0 && m != 0.0 {
                acc -= m * self.death_integral(k, mask, n, &mut scratch);
            }
            *slot = acc;
        }
    }

    /// `Σ_{x∈η} w_x ∫ k(η∪ξ) e_λ(f_x, ξ) dξ` with `w_x = e^{−εE^φ(x,η∖x)}`.
    fn death_integral(&self, k: &[f64], mask: u64, n: usize, scratch: &mut DeathScratch) -> f64 {
        let h = self.hierarchy;
        let sp = &h.space;
        let s = sp.sites();
        scratch.points.clear();
        scratch.points.extend(bits(mask));
        scratch.complement.clear();
        scratch.complement.extend(bits(sp.full_mask() & !mask));
        let base = &mut scratch.products[..n];
        for (slot, &x) in base.iter_mut().zip(&scratch.points) {
            *slot = match self.death {
                DeathScaling::Scaled(e) => {
                    let e_phi: f64 = bits(mask & !(1 << x)).map(|y| h.phi_pair[x * s + y]).sum();
                    exp(-e * e_phi)
                }
                DeathScaling::Limit => 1.0,
            };
        }
        let depth = sp.n_max() - n;
        let ctx = DeathContext {
            k,
            space: sp,
            factor: &self.factor,
            sites: s,
            vol: sp.torus().cell_volume(),
            points: &scratch.points,
            complement: &scratch.complement,
            n,
        };
        ctx.descend(0, depth, mask, 1.0, &mut scratch.products)
    }

    /// `e^{tA}k` for a diagonal operator `A`.
    pub fn semigroup_apply(&self, t: f64, k: &CorrelationVector) -> Result<CorrelationVector> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter { name: "t", reason: "must be finite and >= 0" });
        }
        let diag = self.diagonal().ok_or(Error::InvalidParameter {
            name: "operator",
            reason: "semigroup_apply needs a diagonal operator",
        })?;
        k.check_space(&self.hierarchy.space)?;
        let data = k.values().iter().zip(&diag).map(|(v, d)| exp(t * d) * v).collect();
        CorrelationVector::from_values(&self.hierarchy.space, data)
    }

    /// Dense matrix whose column `j` is the operator applied to basis vector `j`.
    pub fn assemble_dense(&self) -> Result<DenseMatrix> {
        let d = self.dim();
        if d > DENSE_CAP {
            return Err(Error::DimensionCap { dim: d, cap: DENSE_CAP });
        }
        let mut mat = DenseMatrix::zeros(d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                mat.set(i, j, *v);
            }
        }
        Ok(mat)
    }
}

struct DeathScratch {
    points: Vec<usize>,
    complement: Vec<usize>,
    products: Vec<f64>,
}

impl DeathScratch {
    fn new(n_max: usize) -> Self {
        DeathScratch {
            points: Vec::with_capacity(n_max),
            complement: Vec::new(),
            products: vec![0.0; (n_max + 1) * n_max.max(1)],
        }
    }
}

struct DeathContext<'a> {
    k: &'a [f64],
    space: &'a StateSpace,
    factor: &'a [f64],
    sites: usize,
    vol: f64,
    points: &'a [usize],
    complement: &'a [usize],
    n: usize,
}

impl DeathContext<'_> {
    /// Sums over `ξ` built from `complement[start..]` with at most `depth`
    /// more points; `stack[..n]` holds the current per-`x` products.
    fn descend(&self, start: usize, depth: usize, union: u64, weight: f64, stack: &mut [f64]) -> f64 {
        let (cur, rest) = stack.split_at_mut(self.n);
        let mut total = weight * self.k[index(self.space, union)] * cur.iter().sum::<f64>();
        if depth == 0 {
            return total;
        }
        for j in start..self.complement.len() {
            let z = self.complement[j];
            let mut any = false;
            for (i, &x) in self.points.iter().enumerate() {
                let v = cur[i] * self.factor[x * self.sites + z];
                rest[i] = v;
                any |= v != 0.0;
            }
            if any {
                total += self.descend(j + 1, depth - 1, union | (1 << z), weight * self.vol, rest);
            }
        }
        total
    }
}

#[inline]
fn index(space: &StateSpace, mask: u64) -> usize {
    space.index_of(mask).expect("mask within the truncation")
}

/// Iterator over the set bits of a mask, ascending.
#[inline]
pub(crate) fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    core::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// `max_x |(e^{−εφ(x)}−1)/ε + φ(x)|` over the kernel table.
pub fn scaled_factor_deviation(kernels: &KernelPair, epsilon: f64) -> f64 {
    kernels
        .phi_values()
        .iter()
        .map(|&p| (expm1(-epsilon * p) / epsilon + p).abs())
        .fold(0.0, f64::max)
}

/// `h^{d|ξ|}` weights, used by tests that rebuild terms by hand.
#[doc(hidden)]
pub fn lp_weight(space: &StateSpace, n: usize) -> f64 {
    powi(space.torus().cell_volume(), n as i32)
}
