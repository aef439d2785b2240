//! Dense complex matrices and the two factorizations the laboratory needs.
//!
//! Storage is row-major and owned here; `nalgebra` is only reached for
//! Hermitian eigendecomposition and singular values, through [`DenseLinalg`],
//! which is implemented once per concrete float type.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{creal, Real, C};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![creal(T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = creal(T::one());
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds the matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[Vec<C<T>>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Dimension {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(creal(T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[C<T>]) -> Self {
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate().take(self.rows) {
            for v in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *v = *v * di;
            }
        }
        out
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[C<T>]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, &dj) in out.data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(d) {
                *v = *v * dj;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// Factorizations backed by `nalgebra`, one implementation per float type.
pub trait DenseLinalg: Sized {
    /// Requires a square matrix; only the lower triangle is read.
    fn hermitian_eigen(m: &CMatrix<Self>) -> Result<HermitianEigen<Self>>
    where
        Self: Real;

    /// Singular values, largest first.
    fn singular_values(m: &CMatrix<Self>) -> Vec<Self>
    where
        Self: Real;
}

macro_rules! dense_linalg {
    ($t:ty) => {
        impl DenseLinalg for $t {
            fn hermitian_eigen(m: &CMatrix<$t>) -> Result<HermitianEigen<$t>> {
                if m.rows != m.cols {
                    return Err(Error::Dimension {
                        expected: m.rows,
                        found: m.cols,
                    });
                }
                let a = DMatrix::from_row_slice(m.rows, m.cols, &m.data);
                let eig = a.symmetric_eigen();
                let n = m.rows;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
                let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
                let mut vectors = CMatrix::zeros(n, n);
                for (dst, &src) in order.iter().enumerate() {
                    for i in 0..n {
                        vectors[(i, dst)] = eig.eigenvectors[(i, src)];
                    }
                }
                Ok(HermitianEigen { values, vectors })
            }

            fn singular_values(m: &CMatrix<$t>) -> Vec<$t> {
                let a = DMatrix::from_row_slice(m.rows, m.cols, &m.data);
                let mut s: Vec<$t> = a.singular_values().iter().copied().collect();
                s.sort_by(|a, b| b.total_cmp(a));
                s
            }
        }
    };
}

dense_linalg!(f32);
dense_linalg!(f64);
