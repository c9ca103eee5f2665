//! Partially pivoted LU factorisation with a 1-norm condition estimate.

use super::{LinalgError, MatrixR};

/// `PA = LU`, packed in one row-major buffer (unit lower triangle implied).
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    norm_one: f64,
}

/// Solution of `aX = b` together with the estimated 1-norm condition of `a`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: MatrixR,
    pub cond_estimate: f64,
}

impl Lu {
    pub fn factor(a: &MatrixR) -> Result<Self, LinalgError> {
        Self::factor_impl(a, false)
    }

    /// Factor without failing: pivots below `eps·max|a|` are replaced by that
    /// floor. Intended for inverse iteration on nearly singular shifts.
    pub fn factor_regularized(a: &MatrixR) -> Self {
        Self::factor_impl(a, true).expect("regularized factorisation cannot fail")
    }

    fn factor_impl(a: &MatrixR, regularize: bool) -> Result<Self, LinalgError> {
        let n = a.n();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let threshold = n as f64 * f64::EPSILON * scale;
        let floor = if scale > 0.0 {
            f64::EPSILON * scale
        } else {
            f64::MIN_POSITIVE
        };

        for k in 0..n {
            let (pivot_row, pivot_abs) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if regularize {
                if pivot_abs < floor {
                    let p = &mut lu[pivot_row * n + k];
                    *p = if *p < 0.0 { -floor } else { floor };
                }
            } else if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(LinalgError::SingularMatrix {
                    column: k,
                    pivot: pivot_abs,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let pivot_tail = &upper[k * n + k + 1..k * n + n];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (r, &p) in row[k + 1..].iter_mut().zip(pivot_tail) {
                        *r -= factor * p;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            norm_one: a.norm_one(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `a x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&b[i + 1..]).map(|(u, x)| u * x).sum();
            b[i] = (b[i] - s) / self.lu[i * n + i];
        }
    }

    /// Solve `aᵀ x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // Uᵀ z = b
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lu[k * n + i] * b[k];
            }
            b[i] = s / self.lu[i * n + i];
        }
        // Lᵀ y = z
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i] * b[k];
            }
            b[i] = s;
        }
        let mut out = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = b[i];
        }
        b.copy_from_slice(&out);
    }

    /// Solve `a X = b` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &MatrixR) -> MatrixR {
        let n = self.n;
        assert_eq!(b.n(), n, "right-hand side dimension mismatch");
        let src = b.as_slice();
        // Row operations on the permuted right-hand side keep the inner loops
        // contiguous.
        let mut x = vec![0.0; n * n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * n..(i + 1) * n].copy_from_slice(&src[p * n..(p + 1) * n]);
        }
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * n);
            let row = &mut rest[..n];
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l != 0.0 {
                    for (r, &d) in row.iter_mut().zip(&done[k * n..(k + 1) * n]) {
                        *r -= l * d;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * n);
            let row = &mut head[i * n..];
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u != 0.0 {
                    let src_row = &tail[(k - i - 1) * n..(k - i) * n];
                    for (r, &d) in row.iter_mut().zip(src_row) {
                        *r -= u * d;
                    }
                }
            }
            let pivot = self.lu[i * n + i];
            for r in row.iter_mut() {
                *r /= pivot;
            }
        }
        MatrixR::from_row_major(n, x).unwrap_or_else(|_| MatrixR::zeros(n))
    }

    pub fn inverse(&self) -> MatrixR {
        self.solve_matrix(&MatrixR::identity(self.n))
    }

    /// Hager's estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let y_norm: f64 = y.iter().map(|v| v.abs()).sum();
            if !y_norm.is_finite() {
                return f64::INFINITY;
            }
            if y_norm <= estimate {
                break;
            }
            estimate = y_norm;
            let mut z: Vec<f64> = y
                .iter()
                .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            self.solve_transpose_in_place(&mut z);
            let (j, z_max) = z.iter().enumerate().fold((0, 0.0f64), |best, (i, v)| {
                if v.abs() > best.1 {
                    (i, v.abs())
                } else {
                    best
                }
            });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if z_max <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        estimate
    }

    /// `‖A‖₁ · est(‖A⁻¹‖₁)`.
    pub fn cond_estimate(&self) -> f64 {
        self.norm_one * self.inverse_norm_one_estimate()
    }
}

/// Solve `aX = b` by partially pivoted LU, reporting a condition estimate.
pub fn solve_linear(a: &MatrixR, b: &MatrixR) -> Result<Solution, LinalgError> {
    if a.n() != b.n() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let lu = Lu::factor(a)?;
    Ok(Solution {
        x: lu.solve_matrix(b),
        cond_estimate: lu.cond_estimate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> MatrixR {
        MatrixR::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_solve() {
        let b = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let sol = solve_linear(&MatrixR::identity(2), &b).unwrap();
        assert_eq!(sol.x, b);
        assert!((sol.cond_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_solve() {
        let sol = solve_linear(&MatrixR::diag(&[2.0, 4.0]), &MatrixR::identity(2)).unwrap();
        assert_eq!(sol.x, MatrixR::diag(&[0.5, 0.25]));
        assert!((sol.cond_estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            Lu::factor(&a),
            Err(LinalgError::SingularMatrix { column: 1, .. })
        ));
        assert!(matches!(
            Lu::factor(&MatrixR::zeros(3)),
            Err(LinalgError::SingularMatrix { column: 0, .. })
        ));
    }

    #[test]
    fn pivoting_and_transpose() {
        let a = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let lu = Lu::factor(&a).unwrap();
        let mut x = vec![1.0, 2.0, 3.0];
        lu.solve_in_place(&mut x);
        let back = a.matvec(&x);
        for (u, v) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-14);
        }
        let mut y = vec![1.0, -1.0, 0.5];
        lu.solve_transpose_in_place(&mut y);
        let back = a.transpose().matvec(&y);
        for (u, v) in back.iter().zip([1.0, -1.0, 0.5]) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn condition_estimate_exact_for_small() {
        // ‖A‖₁ = 3, ‖A⁻¹‖₁ = 3 for [[1, 2], [0, 1]].
        let a = m(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let cond = Lu::factor(&a).unwrap().cond_estimate();
        assert!((cond - 9.0).abs() < 1e-12, "{cond}");
    }

    #[test]
    fn dimension_mismatch() {
        assert!(solve_linear(&MatrixR::identity(2), &MatrixR::identity(3)).is_err());
    }
}
