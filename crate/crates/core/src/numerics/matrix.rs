//! Row-major dense matrices and the handful of kernels the solvers need.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Row-major real matrix. Rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("DenseMatrix::new", rows * cols, data.len())?;
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite matrix entry at flat index {bad}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim("DenseMatrix::from_rows", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix with `rows` rows by calling `f(i)` for each row.
    pub fn from_fn_rows(rows: usize, cols: usize, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            f(i, m.row_mut(i));
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| &self.data[i * self.cols..(i + 1) * self.cols])
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Appends a column of ones.
    pub fn with_ones_column(&self) -> Self {
        Self::from_fn_rows(self.rows, self.cols + 1, |i, out| {
            out[..self.cols].copy_from_slice(self.row(i));
            out[self.cols] = 1.0;
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("DenseMatrix::matvec", self.cols, v.len())?;
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("DenseMatrix::matmul", self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(k), orow);
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> DenseMatrix {
        let p = self.cols;
        let mut g = Self::zeros(p, p);
        for r in self.row_iter() {
            for j in 0..p {
                let rj = r[j];
                if rj == 0.0 {
                    continue;
                }
                let grow = &mut g.data[j * p..j * p + p];
                for k in j..p {
                    grow[k] += rj * r[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                g.data[j * p + k] = g.data[k * p + j];
            }
        }
        g
    }

    /// `selfᵀ · y`.
    pub fn t_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("DenseMatrix::t_matvec", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.row_iter().zip(y) {
            axpy(yi, r, &mut out);
        }
        Ok(out)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        if self.rows == 0 {
            return m;
        }
        for r in self.row_iter() {
            axpy(1.0, r, &mut m);
        }
        let n = self.rows as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Population standard deviation of every column.
    pub fn column_stds(&self, means: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        if self.rows == 0 {
            return s;
        }
        for r in self.row_iter() {
            for j in 0..self.cols {
                let d = r[j] - means[j];
                s[j] += d * d;
            }
        }
        let n = self.rows as f64;
        s.iter_mut().for_each(|v| *v = (*v / n).sqrt());
        s
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Cholesky factor `L` (lower, row-major) of a symmetric positive-definite matrix.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l.get(i, k) * z[k];
        }
        z[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l.get(k, i) * z[k];
        }
        z[i] = s / l.get(i, i);
    }
    z
}

/// Solves `L y = b` (forward substitution only).
pub fn forward_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l.get(i, k) * z[k];
        }
        z[i] = s / l.get(i, i);
    }
    z
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    let l = cholesky(a)?;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Some(inv)
}

/// Minimum-norm least-squares solution of `a x = b` through the SVD.
pub fn min_norm_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_dim("min_norm_solve", a.rows(), b.len())?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(vec![0.0; a.cols()]);
    }
    let na = a.to_nalgebra();
    let svd = na.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let eps = smax * f64::EPSILON * (a.rows().max(a.cols()) as f64);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::Domain(format!("svd solve failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    let na = a.to_nalgebra();
    na.singular_values().iter().cloned().fold(0.0_f64, f64::max)
}

/// Spectral radius (largest eigenvalue modulus) of a square matrix.
pub fn spectral_radius(a: &DenseMatrix) -> f64 {
    let na = a.to_nalgebra();
    na.complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
}
