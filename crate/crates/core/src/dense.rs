//! Small dense linear algebra for the oracle path.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::powi;
use crate::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch { expected: n * n, found: data.len(), what: "matrix entries" });
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        self.data.chunks_exact(self.n.max(1)).take(self.n).map(|row| dot(row, v)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        DenseMatrix { n: self.n, data: self.data.iter().map(|v| c * v).collect() }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let n = self.n;
        (0..n).map(|j| (0..n).map(|i| self.data[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let (piv, pmax) =
                (col..n).map(|r| (r, a[r * n + col].abs())).fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::InvalidParameter { name: "matrix", reason: "singular in LU solve" });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                    b.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                for j in 0..n {
                    b[r * n + j] -= f * b[col * n + j];
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for j in 0..n {
                let mut s = b[col * n + j];
                for k in col + 1..n {
                    s -= a[col * n + k] * b[k * n + j];
                }
                b[col * n + j] = s / d;
            }
        }
        Ok(DenseMatrix { n, data: b })
    }

    /// Matrix exponential by scaling and squaring with the degree-13 diagonal
    /// Padé approximant.
    pub fn expm(&self) -> Result<Self> {
        const B: [f64; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        const THETA13: f64 = 5.371920351148152;
        let n = self.n;
        let norm = self.norm1();
        if !norm.is_finite() {
            return Err(Error::InvalidParameter { name: "matrix", reason: "non-finite entries" });
        }
        let mut s = 0i32;
        if norm > THETA13 {
            s = libm::ceil(libm::log2(norm / THETA13)) as i32;
        }
        let a = self.scaled(1.0 / powi(2.0, s));
        let id = DenseMatrix::identity(n);
        let a2 = a.matmul(&a);
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);
        let inner_u = a6.scaled(B[13]).add_scaled(B[11], &a4).add_scaled(B[9], &a2);
        let u = a6
            .matmul(&inner_u)
            .add_scaled(B[7], &a6)
            .add_scaled(B[5], &a4)
            .add_scaled(B[3], &a2)
            .add_scaled(B[1], &id);
        let u = a.matmul(&u);
        let inner_v = a6.scaled(B[12]).add_scaled(B[10], &a4).add_scaled(B[8], &a2);
        let v = a6
            .matmul(&inner_v)
            .add_scaled(B[6], &a6)
            .add_scaled(B[4], &a4)
            .add_scaled(B[2], &a2)
            .add_scaled(B[0], &id);
        let p = v.add_scaled(1.0, &u);
        let q = v.add_scaled(-1.0, &u);
        let mut r = q.solve(&p)?;
        for _ in 0..s {
            r = r.matmul(&r);
        }
        Ok(r)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
