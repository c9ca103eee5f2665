//! Dense real matrices, LU solves and a real Schur eigenvalue solver.

mod eigen;
mod lu;

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{
    balance, hessenberg, pencil_eigenpairs, real_generalized_eigencount, real_schur_eigen,
    EigenClassification, PencilEigenpairs, PencilSide, SchurForm, DEFAULT_TOL, ILL_CONDITIONED,
};
pub use lu::{solve_linear, Lu, Solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("QR iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("both pencil slices are ill-conditioned (estimates {cond_t1:e}, {cond_t2:e})")]
    DegeneratePencil { cond_t1: f64, cond_t2: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Square matrix of `f64`, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixR {
    n: usize,
    data: Vec<f64>,
}

impl MatrixR {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Build from row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Columns given as vectors of length `n`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &MatrixR) -> MatrixR {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = MatrixR::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> MatrixR {
        MatrixR {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// `self - rhs`.
    pub fn sub(&self, rhs: &MatrixR) -> MatrixR {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        MatrixR {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self - shift * rhs`.
    pub fn sub_scaled(&self, shift: f64, rhs: &MatrixR) -> MatrixR {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        MatrixR {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - shift * b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<(usize, usize)> for MatrixR {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for MatrixR {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for MatrixR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixR({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(MatrixR::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert_eq!(
            MatrixR::from_row_major(2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(LinalgError::NonFinite)
        );
        let m = MatrixR::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.column(1), vec![2.0, 4.0]);
        assert_eq!(m.transpose()[(0, 1)], 3.0);
        assert_eq!(m.norm_one(), 6.0);
    }

    #[test]
    fn products() {
        let a = MatrixR::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = MatrixR::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ab = a.matmul(&b);
        assert_eq!(ab.rows(), vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(a.matmul(&MatrixR::identity(2)), a);
    }
}
