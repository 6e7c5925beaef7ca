//! Explicit one-step integrators: classical RK4 and adaptive Dormand–Prince 5(4).

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{powf, sqrt};
use crate::{Error, Result};

/// One classical RK4 step of `y' = f(t, y)`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k1);
    axpy_into(&mut tmp, y, 0.5 * h, &k1);
    f(t + 0.5 * h, &tmp, &mut k2);
    axpy_into(&mut tmp, y, 0.5 * h, &k2);
    f(t + 0.5 * h, &tmp, &mut k3);
    axpy_into(&mut tmp, y, h, &k3);
    f(t + h, &tmp, &mut k4);
    (0..n).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, k: &[f64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + h * b;
    }
}

/// Tolerances for [`dopri45`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerance { rtol, atol, max_steps: 10_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with adaptive Dormand–Prince
/// steps; returns `y(t1)`.
pub fn dopri45<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 || n == 0 {
        return Ok(y);
    }
    if t1 < t0 {
        return Err(Error::InvalidParameter { name: "t1", reason: "integration runs forward only" });
    }
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = t0;
    f(t, &y, &mut k[0]);
    let scale0: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max) * tol.rtol + tol.atol;
    let d1: f64 = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h = if d1 > 0.0 { 0.01 * scale0.max(1e-300) / d1 } else { 1e-3 * (t1 - t0) };
    h = h.max(1e-6 * (t1 - t0)).min(t1 - t0);
    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::StepCollapse { time: t, step: h });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h, &stage, &mut tail[0]);
        }
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = sqrt(err / n as f64);
        if !err.is_finite() {
            h *= 0.2;
            if h < 1e-14 * (t1 - t0).max(1.0) {
                return Err(Error::StepCollapse { time: t, step: h });
            }
            continue;
        }
        if err <= 1.0 {
            t = if t1 - t <= h { t1 } else { t + h };
            core::mem::swap(&mut y, &mut y_new);
            // first-same-as-last
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * powf(err, -0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * powf(err, -0.2)).clamp(0.2, 1.0);
            if h < 1e-14 * (t1 - t0).max(1.0) {
                return Err(Error::StepCollapse { time: t, step: h });
            }
        }
    }
    Ok(y)
}
