//! Stationary points of the homogeneous kinetic equation.
//!
//! With `x = ⟨φ⟩ρ`, `b = ⟨a⟩/(m⟨φ⟩)` and `c = λ⟨φ⟩/m`, stationarity reads
//! `f(x) := x e^{−x} + b x² = c`. For `b` below the threshold
//! `b* = (3−√5)/4 · e^{−(1+√5)/2}` the function `f` has a local maximum and a
//! local minimum, and `f = c` has three positive roots for `c` between them.

use alloc::vec::Vec;

use crate::math::{exp, sqrt};
use crate::{Error, Result};

/// Bisection stopping width for roots and extrema.
pub const ROOT_TOL: f64 = 1e-12;
/// `|f − c|` below which a grid extremum counts as a tangency.
pub const TANGENCY_TOL: f64 = 1e-10;

/// The golden ratio `x0 = (1+√5)/2`, where the threshold tangency occurs.
pub fn tangency_point() -> f64 {
    (1.0 + sqrt(5.0)) / 2.0
}

pub fn threshold_b() -> f64 {
    (3.0 - sqrt(5.0)) / 4.0 * exp(-tangency_point())
}

#[inline]
pub fn stationary_function(x: f64, b: f64) -> f64 {
    x * exp(-x) + b * x * x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationInput {
    pub b: f64,
    pub c: f64,
    pub x_hi: f64,
    pub resolution: usize,
}

impl BifurcationInput {
    pub const DEFAULT_X_HI: f64 = 50.0;
    pub const DEFAULT_RESOLUTION: usize = 100_000;

    pub fn new(b: f64, c: f64) -> Result<Self> {
        let inp = BifurcationInput { b, c, x_hi: Self::DEFAULT_X_HI, resolution: Self::DEFAULT_RESOLUTION };
        inp.validate()?;
        Ok(inp)
    }

    /// `b = ⟨a⟩/(m⟨φ⟩)`, `c = λ⟨φ⟩/m`.
    pub fn from_rates(avg_a: f64, m: f64, avg_phi: f64, lambda: f64) -> Result<Self> {
        if !(m > 0.0 && avg_phi > 0.0) {
            return Err(Error::InvalidParameter { name: "rates", reason: "needs m > 0 and <phi> > 0" });
        }
        BifurcationInput::new(avg_a / (m * avg_phi), lambda * avg_phi / m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::InvalidParameter { name: "b", reason: "must be finite and >= 0" });
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter { name: "c", reason: "must be finite and > 0" });
        }
        if self.resolution < 2 || !(self.x_hi.is_finite() && self.x_hi > 0.0) {
            return Err(Error::InvalidParameter { name: "scan window", reason: "needs x_hi > 0 and resolution >= 2" });
        }
        if stationary_function(self.x_hi, self.b) <= self.c {
            return Err(Error::NoBracket { what: "right end of the scan window (f(x_hi) <= c)" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Sorted roots in the scaled variable `x`.
    pub roots: Vec<f64>,
    /// A root lies within one grid cell of the window edge.
    pub edge_warning: bool,
    /// A grid extremum of `f − c` touched zero without a sign change.
    pub tangency: bool,
}

impl ScanResult {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// Roots as densities `ρ = x/⟨φ⟩`.
    pub fn densities(&self, avg_phi: f64) -> Vec<f64> {
        self.roots.iter().map(|x| x / avg_phi).collect()
    }
}

pub fn stationary_scan(inp: &BifurcationInput) -> Result<ScanResult> {
    inp.validate()?;
    let n = inp.resolution;
    let cell = inp.x_hi / n as f64;
    let g = |x: f64| stationary_function(x, inp.b) - inp.c;
    let mut roots = Vec::new();
    let mut tangency = false;
    let mut prev = g(0.0);
    let mut prev2 = f64::NAN;
    for i in 1..=n {
        let x = cell * i as f64;
        let cur = g(x);
        if cur == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            roots.push(bisect(&g, x - cell, x));
        }
        // extremum at the previous node that stays on one side of c
        if !prev2.is_nan() && prev.abs() <= TANGENCY_TOL && (prev - prev2) * (cur - prev) <= 0.0 && prev != 0.0 {
            tangency = true;
        }
        prev2 = prev;
        prev = cur;
    }
    let edge_warning = roots.iter().any(|&r| r <= cell || r >= inp.x_hi - cell);
    Ok(ScanResult { roots, edge_warning, tangency })
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = f(lo) < 0.0;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The fold interval for `0 < b < b*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldRange {
    /// Local maximum of `f`, in `(1, x0)`.
    pub x_max: f64,
    /// Local minimum of `f`, beyond `x0`.
    pub x_min: f64,
    /// `f(x_min)`.
    pub c_low: f64,
    /// `f(x_max)`.
    pub c_high: f64,
}

impl FoldRange {
    pub fn contains(&self, c: f64) -> bool {
        self.c_low < c && c < self.c_high
    }
}

/// Solves `2bx = (x−1)e^{−x}` on `(1, x0)` and `(x0, ∞)`.
pub fn critical_c_range(b: f64) -> Result<FoldRange> {
    let bs = threshold_b();
    if !(b > 0.0 && b < bs) {
        return Err(Error::InvalidParameter { name: "b", reason: "fold interval needs 0 < b < b*" });
    }
    let h = |x: f64| (x - 1.0) * exp(-x) - 2.0 * b * x;
    let x0 = tangency_point();
    let x_max = bisect(&h, 1.0, x0);
    let mut far = 2.0 * x0;
    while h(far) >= 0.0 {
        far *= 2.0;
        if far > 1e6 {
            return Err(Error::NoBracket { what: "local minimum of f" });
        }
    }
    let x_min = bisect(&h, x0, far);
    Ok(FoldRange { x_max, x_min, c_low: stationary_function(x_min, b), c_high: stationary_function(x_max, b) })
}

/// `(b, c_low, c_high)` for each `b` below the threshold.
pub fn fold_curve(bs: &[f64]) -> Result<Vec<(f64, FoldRange)>> {
    bs.iter().map(|&b| critical_c_range(b).map(|r| (b, r))).collect()
}
