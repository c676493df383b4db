//! Small dense vector and symmetric-matrix kernels.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| libm::fabs(*v)).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Convex combination `(1 - gamma) * x + gamma * v`, written into `x`.
pub fn lerp_into(x: &mut [f64], v: &[f64], gamma: f64) {
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi += gamma * (vi - *xi);
    }
}

pub fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

pub fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    /// `AᵀA` for a row-major `rows x cols` matrix `a`.
    pub fn gram(a: &[f64], rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(cols);
        for r in 0..rows {
            let row = &a[r * cols..(r + 1) * cols];
            for i in 0..cols {
                if row[i] == 0.0 {
                    continue;
                }
                for j in i..cols {
                    m.data[i * cols + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..cols {
            for j in 0..i {
                m.data[i * cols + j] = m.data[j * cols + i];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add_assign(&mut self, other: &SymMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn add_diagonal(&mut self, s: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += s;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    /// `xᵀ M x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        dot(&self.mul_vec(x), x)
    }

    /// Eigenvalues in ascending order.
    ///
    /// Cyclic Jacobi rotations up to dimension 128; beyond that a shifted
    /// power iteration that only reports the extreme pair reliably (interior
    /// entries are left out and the returned vector has length 2).
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        if self.n <= 128 {
            jacobi_eigenvalues(self)
        } else {
            let hi = power_iteration(self, 1e-8, 10_000);
            let mut shifted = self.clone();
            for v in shifted.data.iter_mut() {
                *v = -*v;
            }
            shifted.add_diagonal(hi);
            let lo = hi - power_iteration(&shifted, 1e-8, 10_000);
            vec![lo, hi]
        }
    }

    /// `(λmin, λmax)`; negative rounding noise is clamped to zero for
    /// positive semidefinite inputs.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(lo), Some(hi)) => (*lo, *hi),
            _ => (0.0, 0.0),
        }
    }
}

fn jacobi_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mut a = m.data.clone();
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Largest eigenvalue of a positive semidefinite matrix by power iteration
/// (relative tolerance on the Rayleigh quotient, iteration cap).
pub fn power_iteration(m: &SymMatrix, tol: f64, max_iters: usize) -> f64 {
    let n = m.n;
    if n == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 1e-3).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        let w = m.mul_vec(&v);
        let next = dot(&w, &v);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if libm::fabs(next - lambda) <= tol * libm::fabs(next).max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}
