//! Periodic convolution `(k∗ρ)(x) = h^d Σ_y k(x−y) ρ(y)` on a torus, by direct
//! summation or by a separable discrete Fourier transform.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, sin};

use crate::lattice::Torus;

/// Above this site count [`convolve`] switches to the transform path.
pub const DIRECT_LIMIT: usize = 256;

pub fn convolve_direct(torus: &Torus, kernel: &[f64], rho: &[f64]) -> Vec<f64> {
    let s = torus.site_count();
    let vol = torus.cell_volume();
    (0..s)
        .map(|x| vol * (0..s).map(|y| kernel[torus.difference(x, y)] * rho[y]).sum::<f64>())
        .collect()
}

pub fn convolve_dft(torus: &Torus, kernel: &[f64], rho: &[f64]) -> Vec<f64> {
    let s = torus.site_count();
    let mut kr: Vec<f64> = kernel.to_vec();
    let mut ki = vec![0.0; s];
    let mut rr: Vec<f64> = rho.to_vec();
    let mut ri = vec![0.0; s];
    transform(torus, &mut kr, &mut ki, false);
    transform(torus, &mut rr, &mut ri, false);
    for i in 0..s {
        let (a, b, c, d) = (kr[i], ki[i], rr[i], ri[i]);
        kr[i] = a * c - b * d;
        ki[i] = a * d + b * c;
    }
    transform(torus, &mut kr, &mut ki, true);
    let w = torus.cell_volume() / s as f64;
    kr.into_iter().map(|v| w * v).collect()
}

/// Direct sum on small tori, transform otherwise.
pub fn convolve(torus: &Torus, kernel: &[f64], rho: &[f64]) -> Vec<f64> {
    if torus.site_count() <= DIRECT_LIMIT {
        convolve_direct(torus, kernel, rho)
    } else {
        convolve_dft(torus, kernel, rho)
    }
}

/// Unnormalized multi-dimensional DFT applied axis by axis, in place.
fn transform(torus: &Torus, re: &mut [f64], im: &mut [f64], inverse: bool) {
    let m = torus.sites_per_axis();
    let s = torus.site_count();
    let sign = if inverse { 1.0 } else { -1.0 };
    let tw: Vec<(f64, f64)> = (0..m).map(|k| {
        let th = sign * 2.0 * PI * k as f64 / m as f64;
        (cos(th), sin(th))
    }).collect();
    let mut lr = vec![0.0; m];
    let mut li = vec![0.0; m];
    let mut stride = 1;
    for _ in 0..torus.dim() {
        for base in 0..s {
            // line starts are the sites whose coordinate on this axis is zero
            if (base / stride) % m != 0 {
                continue;
            }
            for j in 0..m {
                lr[j] = re[base + j * stride];
                li[j] = im[base + j * stride];
            }
            line_dft(&mut lr, &mut li, &tw);
            for j in 0..m {
                re[base + j * stride] = lr[j];
                im[base + j * stride] = li[j];
            }
        }
        stride *= m;
    }
}

fn line_dft(re: &mut [f64], im: &mut [f64], tw: &[(f64, f64)]) {
    let m = re.len();
    if m.is_power_of_two() && m > 1 {
        fft_radix2(re, im, tw);
        return;
    }
    let (src_r, src_i) = (re.to_vec(), im.to_vec());
    for k in 0..m {
        let (mut ar, mut ai) = (0.0, 0.0);
        for j in 0..m {
            let (c, s) = tw[(j * k) % m];
            ar += src_r[j] * c - src_i[j] * s;
            ai += src_r[j] * s + src_i[j] * c;
        }
        re[k] = ar;
        im[k] = ai;
    }
}

fn fft_radix2(re: &mut [f64], im: &mut [f64], tw: &[(f64, f64)]) {
    let m = re.len();
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= m {
        let step = m / len;
        for start in (0..m).step_by(len) {
            for k in 0..len / 2 {
                let (c, s) = tw[k * step];
                let (a, b) = (start + k, start + k + len / 2);
                let tr = re[b] * c - im[b] * s;
                let ti = re[b] * s + im[b] * c;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transform_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, m) in [(1, 64), (1, 12), (2, 8), (2, 6), (3, 4)] {
            let t = Torus::new(d, m, 0.37).unwrap();
            let s = t.site_count();
            let k: Vec<f64> = (0..s).map(|_| rng.gen_range(0.0..2.0)).collect();
            let r: Vec<f64> = (0..s).map(|_| rng.gen_range(0.0..3.0)).collect();
            let a = convolve_direct(&t, &k, &r);
            let b = convolve_dft(&t, &k, &r);
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * scale, "{d} {m}");
            }
        }
    }

    #[test]
    fn constant_field_convolves_to_mass() {
        let t = Torus::new(1, 16, 0.25).unwrap();
        let k: Vec<f64> = (0..16).map(|v| if v == 0 { 0.0 } else { 1.0 / (1 + v.min(16 - v)) as f64 }).collect();
        let mass = t.cell_volume() * k.iter().sum::<f64>();
        for v in convolve_dft(&t, &k, &[0.7; 16]) {
            assert!((v - 0.7 * mass).abs() < 1e-14);
        }
    }
}
