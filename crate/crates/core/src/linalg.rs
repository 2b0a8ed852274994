//! Minimal dense symmetric-positive-definite matrix support.
//!
//! Signal covariances in this crate are small (one row per trial site), so a
//! hand-rolled Cholesky factorization is all the linear algebra we need. The
//! factorization is computed once at construction; solves and sampling reuse
//! the cached factor. Inverses are never formed explicitly.

use crate::error::{Error, Result};

/// Relative pivot floor: a Cholesky pivot below `PIVOT_RTOL * max diagonal`
/// rejects the matrix as not positive definite.
const PIVOT_RTOL: f64 = 1e-12;

/// Relative asymmetry tolerated before rejecting the input.
const SYMMETRY_RTOL: f64 = 1e-12;

/// A symmetric positive definite matrix with a cached lower Cholesky factor.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    n: usize,
    data: Vec<f64>, // row-major, n x n
    chol: Vec<f64>, // lower triangular factor L with A = L Lᵀ, row-major
}

impl SpdMatrix {
    /// Build from a row-major `n x n` buffer, verifying symmetry and
    /// positive definiteness.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SpdMatrix::new"));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (data[i * n + j] - data[j * n + i]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::NotSpd(format!(
                        "entries ({i},{j}) and ({j},{i}) differ: {} vs {}",
                        data[i * n + j],
                        data[j * n + i]
                    )));
                }
            }
        }
        let chol = cholesky(n, &data)?;
        Ok(SpdMatrix { n, data, chol })
    }

    /// Diagonal matrix with the given (positive) entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(n, data)
    }

    /// 1x1 matrix.
    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(1, vec![v])
    }

    /// Identity of the given dimension.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SpdMatrix {
            n,
            data,
            chol: {
                let mut l = vec![0.0; n * n];
                for i in 0..n {
                    l[i * n + i] = 1.0;
                }
                l
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row-major copy of the entries.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// `A x`.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.data[i * self.n + j] * x[j])
                    .sum()
            })
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let ax = self.mat_vec(x);
        dot(x, &ax)
    }

    /// Solve `A y = b` via the cached factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        // forward: L z = b
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.chol[i * n + j] * z[j];
            }
            z[i] = s / self.chol[i * n + i];
        }
        // backward: Lᵀ y = z
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= self.chol[j * n + i] * y[j];
            }
            y[i] = s / self.chol[i * n + i];
        }
        y
    }

    /// `L z` where `A = L Lᵀ`; maps standard normals to draws with covariance `A`.
    pub fn chol_mul(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| (0..=i).map(|j| self.chol[i * n + j] * z[j]).sum())
            .collect()
    }
}

fn cholesky(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[i * n + i].abs())).max(1.0);
    let floor = PIVOT_RTOL * max_diag;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= floor {
                    return Err(Error::NotSpd(format!(
                        "pivot {s} at row {i} is below {floor}"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
