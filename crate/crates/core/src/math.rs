//! Float helpers over `libm` (the crate is `no_std`).

pub(crate) use libm::{exp, log as ln, sqrt};

pub(crate) const E: f64 = core::f64::consts::E;

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `expm1(x)` without cancellation for small `x`.
#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

/// `ln(n!)` by direct summation; n stays small in this crate.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| ln(k as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_repeated_multiplication() {
        assert_eq!(powi(2.0, 10), 1024.0);
        assert_eq!(powi(3.0, 0), 1.0);
        assert!((powi(2.0, -2) - 0.25).abs() < 1e-15);
    }
}
