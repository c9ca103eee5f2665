//! Rank classification and explicit CP decomposition of `N x N x 2` tensors.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    pencil_eigenpairs, real_generalized_eigencount, LinalgError, Lu, MatrixR, PencilSide,
};
use crate::rng::RngState;

/// Verdicts with a margin below this carry a low-confidence warning.
pub const LOW_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("dimension error: {0}")]
    DimensionError(String),
    #[error("tensor is not rank N: {real_count} of {n} pencil roots are real")]
    NotRankN { real_count: usize, n: usize },
    #[error("pencil eigenvalues are repeated (gap {gap:e} below {threshold:e})")]
    RepeatedEigenvalues { gap: f64, threshold: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Tensor with frontal slices `T[:, :, 0]` and `T[:, :, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor3 {
    n: usize,
    slice1: MatrixR,
    slice2: MatrixR,
}

impl Tensor3 {
    pub fn new(slice1: MatrixR, slice2: MatrixR) -> Result<Self, RankError> {
        if slice1.n() != slice2.n() {
            return Err(RankError::DimensionError(format!(
                "slice sizes differ: {} vs {}",
                slice1.n(),
                slice2.n()
            )));
        }
        if slice1.n() == 0 {
            return Err(RankError::DimensionError("empty tensor".into()));
        }
        Ok(Self {
            n: slice1.n(),
            slice1,
            slice2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slice1(&self) -> &MatrixR {
        &self.slice1
    }

    pub fn slice2(&self) -> &MatrixR {
        &self.slice2
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            slice1: self.slice1.scaled(c),
            slice2: self.slice2.scaled(c),
        }
    }

    /// Frobenius norm of both slices stacked.
    pub fn frobenius_norm(&self) -> f64 {
        self.slice1
            .frobenius_norm()
            .hypot(self.slice2.frobenius_norm())
    }

    /// Gaussian tensor drawn from one RNG stream, slice 1 first.
    pub fn random(n: usize, state: RngState) -> Self {
        let mut g = state.generator();
        let s1 = g.gaussian_matrix(n);
        let s2 = g.gaussian_matrix(n);
        Self::new(s1, s2).expect("equal sizes")
    }

    /// `T1 = T2 X Λ X⁻¹` with Gaussian `T2`, `X` and diagonal `Λ`, so every
    /// pencil root is real.
    pub fn planted_rank_n(n: usize, state: RngState) -> Result<Self, RankError> {
        let mut g = state.generator();
        let t2 = g.gaussian_matrix(n);
        let x = g.gaussian_matrix(n);
        let lambda = g.gaussian_vector(n);
        let x_inv = Lu::factor(&x)?.inverse();
        let t1 = t2.matmul(&x).matmul(&MatrixR::diag(&lambda)).matmul(&x_inv);
        Self::new(t1, t2)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    n: usize,
    slice1: Vec<Vec<f64>>,
    slice2: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: Vec<Vec<f64>>, n: usize, name: &str) -> Result<MatrixR, RankError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(RankError::DimensionError(format!("{name} is not {n}x{n}")));
    }
    MatrixR::from_rows(&rows).map_err(|e| RankError::DimensionError(format!("{name}: {e}")))
}

/// Parse a tensor from its text or JSON representation.
pub fn parse_tensor(text: &str) -> Result<Tensor3, RankError> {
    if text.trim_start().starts_with('{') {
        let file: TensorFile = serde_json::from_str(text).map_err(|e| RankError::ParseError {
            line: e.line(),
            message: e.to_string(),
        })?;
        let s1 = matrix_from_rows(file.slice1, file.n, "slice1")?;
        let s2 = matrix_from_rows(file.slice2, file.n, "slice2")?;
        return Tensor3::new(s1, s2);
    }

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .ok_or(RankError::ParseError {
            line: 1,
            message: "empty input".into(),
        })?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", value] => value.parse::<usize>().map_err(|e| RankError::ParseError {
            line: header_line,
            message: format!("bad dimension {value:?}: {e}"),
        })?,
        _ => {
            return Err(RankError::ParseError {
                line: header_line,
                message: format!("expected \"n <N>\", found {header:?}"),
            })
        }
    };
    if n == 0 {
        return Err(RankError::DimensionError("n must be at least 1".into()));
    }

    // Slices are blocks of rows separated by blank lines.
    let mut blocks: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut current: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| RankError::ParseError {
                    line: line_no,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(RankError::ParseError {
                line: line_no,
                message: "non-finite entry".into(),
            });
        }
        current.push(row);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.len() != 2 {
        return Err(RankError::DimensionError(format!(
            "expected 2 slices, found {}",
            blocks.len()
        )));
    }
    let s2 = matrix_from_rows(blocks.pop().unwrap_or_default(), n, "slice2")?;
    let s1 = matrix_from_rows(blocks.pop().unwrap_or_default(), n, "slice1")?;
    Tensor3::new(s1, s2)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor3, RankError> {
    parse_tensor(&fs::read_to_string(path)?)
}

/// Text representation with 17 significant digits per entry.
pub fn format_tensor(t: &Tensor3) -> String {
    let mut out = format!("n {}\n", t.n);
    for (k, slice) in [&t.slice1, &t.slice2].into_iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for i in 0..t.n {
            let row: Vec<String> = slice.row(i).iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn save_tensor(t: &Tensor3, path: impl AsRef<Path>) -> Result<(), RankError> {
    fs::write(path, format_tensor(t))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    RankN,
    RankNPlus1,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankVerdict {
    pub n: usize,
    pub verdict: Verdict,
    pub real_count: usize,
    /// Smaller of the 2x2 block discriminant margin and the minimum relative
    /// gap between real roots; 1 when neither applies.
    pub margin: f64,
    /// Reason for a `Degenerate` verdict.
    pub detail: Option<String>,
}

impl RankVerdict {
    /// Generic rank implied by the verdict.
    pub fn rank(&self) -> Option<usize> {
        match self.verdict {
            Verdict::RankN => Some(self.n),
            Verdict::RankNPlus1 => Some(self.n + 1),
            Verdict::Degenerate => None,
        }
    }

    pub fn low_margin(&self) -> bool {
        self.margin < LOW_MARGIN
    }
}

impl fmt::Display for RankVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rank() {
            Some(r) => write!(f, "rank {r}")?,
            None => write!(f, "degenerate")?,
        }
        write!(
            f,
            " (real roots {}/{}, margin {:.3e})",
            self.real_count, self.n, self.margin
        )?;
        if let Some(d) = &self.detail {
            write!(f, ": {d}")?;
        } else if self.low_margin() {
            write!(f, " [warning: low margin]")?;
        }
        Ok(())
    }
}

fn min_relative_gap(values: &[f64]) -> f64 {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(|a, b| a.total_cmp(b));
    let scale = finite.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    finite
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::INFINITY, f64::min)
}

/// Rank `N` iff `det(T1 - λ T2) = 0` has only real roots.
pub fn classify_rank(t: &Tensor3, tol: f64) -> RankVerdict {
    let n = t.n;
    match real_generalized_eigencount(&t.slice1, &t.slice2, tol) {
        Ok(c) => {
            let margin = c
                .min_block_margin
                .min(min_relative_gap(&c.real_eigenvalues))
                .min(1.0);
            let (verdict, detail) = if c.is_ambiguous() {
                (
                    Verdict::Degenerate,
                    Some(format!(
                        "{} block(s) inside the tolerance band",
                        c.ambiguous_blocks
                    )),
                )
            } else if c.real_count == n {
                (Verdict::RankN, None)
            } else {
                (Verdict::RankNPlus1, None)
            };
            RankVerdict {
                n,
                verdict,
                real_count: c.real_count,
                margin,
                detail,
            }
        }
        Err(e) => RankVerdict {
            n,
            verdict: Verdict::Degenerate,
            real_count: 0,
            margin: 0.0,
            detail: Some(e.to_string()),
        },
    }
}

pub fn classify_batch(tensors: &[Tensor3], tol: f64) -> Vec<RankVerdict> {
    tensors.par_iter().map(|t| classify_rank(t, tol)).collect()
}

/// `T = Σ u_i ⊗ v_i ⊗ w_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CPFactors {
    pub r: usize,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub factors: CPFactors,
    /// Pencil roots `λ_i` (infinite when the slice-1 route finds `μ_i = 0`).
    pub eigenvalues: Vec<f64>,
    /// 1-norm condition estimate of the unit-column eigenvector matrix.
    pub eigenvector_condition: f64,
    pub relative_error: f64,
}

/// Rank-`N` CP decomposition from the real eigenstructure of the pencil.
pub fn decompose_rank_n(t: &Tensor3, tol: f64) -> Result<Decomposition, RankError> {
    let n = t.n;
    let verdict = classify_rank(t, tol);
    if verdict.verdict != Verdict::RankN {
        return Err(RankError::NotRankN {
            real_count: verdict.real_count,
            n,
        });
    }
    let pairs = pencil_eigenpairs(&t.slice1, &t.slice2, tol)?;
    if pairs.values.len() != n {
        return Err(RankError::NotRankN {
            real_count: pairs.values.len(),
            n,
        });
    }

    let mut sorted = pairs.values.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let scale = sorted
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let threshold = tol * scale;
    let gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if gap <= threshold {
        return Err(RankError::RepeatedEigenvalues { gap, threshold });
    }

    let x = MatrixR::from_columns(&pairs.vectors)?;
    let lu = Lu::factor(&x)?;
    let eigenvector_condition = lu.cond_estimate();
    let r = lu.inverse();

    let base = match pairs.side {
        PencilSide::InvertT2 => &t.slice2,
        PencilSide::InvertT1 => &t.slice1,
    };
    let mut factors = CPFactors {
        r: n,
        u: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
    };
    let mut eigenvalues = Vec::with_capacity(n);
    for (i, (&theta, xi)) in pairs.values.iter().zip(&pairs.vectors).enumerate() {
        factors.u.push(base.matvec(xi));
        factors.v.push(r.row(i).to_vec());
        match pairs.side {
            PencilSide::InvertT2 => {
                factors.w.push([theta, 1.0]);
                eigenvalues.push(theta);
            }
            PencilSide::InvertT1 => {
                factors.w.push([1.0, theta]);
                eigenvalues.push(if theta == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / theta
                });
            }
        }
    }
    let relative_error = relative_error(&factors, t)?;
    Ok(Decomposition {
        factors,
        eigenvalues,
        eigenvector_condition,
        relative_error,
    })
}

pub fn reconstruct(f: &CPFactors, n: usize) -> Result<Tensor3, RankError> {
    if f.u.len() != f.r || f.v.len() != f.r || f.w.len() != f.r {
        return Err(RankError::DimensionError(format!(
            "factor lists must all have length r = {}",
            f.r
        )));
    }
    if f.u.iter().chain(&f.v).any(|x| x.len() != n) {
        return Err(RankError::DimensionError(format!(
            "factor vectors must have length {n}"
        )));
    }
    if n == 0 {
        return Err(RankError::DimensionError("n must be at least 1".into()));
    }
    let mut s1 = MatrixR::zeros(n);
    let mut s2 = MatrixR::zeros(n);
    for ((u, v), w) in f.u.iter().zip(&f.v).zip(&f.w) {
        for a in 0..n {
            for b in 0..n {
                let uv = u[a] * v[b];
                s1[(a, b)] += uv * w[0];
                s2[(a, b)] += uv * w[1];
            }
        }
    }
    Tensor3::new(s1, s2)
}

/// `‖reconstruct(f) - t‖_F / ‖t‖_F` over both slices; absolute when `t = 0`.
pub fn relative_error(f: &CPFactors, t: &Tensor3) -> Result<f64, RankError> {
    let back = reconstruct(f, t.n)?;
    let diff = back
        .slice1
        .sub(&t.slice1)
        .frobenius_norm()
        .hypot(back.slice2.sub(&t.slice2).frobenius_norm());
    let norm = t.frobenius_norm();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    fn rotation() -> MatrixR {
        MatrixR::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn parse_text_tensor() {
        let t = parse_tensor("n 2\n1 0\n0 1\n\n0 -1\n1 0\n").unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.slice2(), &rotation());
    }

    #[test]
    fn missing_slice_is_dimension_error() {
        let err = parse_tensor("n 2\n1 0\n0 1\n").unwrap_err();
        assert!(matches!(err, RankError::DimensionError(_)), "{err}");
        let err = parse_tensor("n 2\n1 0\n0 1\n\n1 2 3\n4 5 6\n").unwrap_err();
        assert!(matches!(err, RankError::DimensionError(_)), "{err}");
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(
            parse_tensor("m 2\n"),
            Err(RankError::ParseError { line: 1, .. })
        ));
        assert!(matches!(
            parse_tensor("n 1\nx\n\n1\n"),
            Err(RankError::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn parse_json_tensor() {
        let t = parse_tensor(r#"{"n": 1, "slice1": [[2.0]], "slice2": [[3.0]]}"#).unwrap();
        assert_eq!(t.slice1()[(0, 0)], 2.0);
        assert!(parse_tensor(r#"{"n": 2, "slice1": [[2.0]], "slice2": [[3.0]]}"#).is_err());
    }

    #[test]
    fn classify_examples() {
        let i2 = MatrixR::identity(2);
        let v = classify_rank(&Tensor3::new(i2.clone(), rotation()).unwrap(), DEFAULT_TOL);
        assert_eq!(v.verdict, Verdict::RankNPlus1);
        assert_eq!(v.rank(), Some(3));
        assert_eq!(v.real_count, 0);

        let v = classify_rank(
            &Tensor3::new(MatrixR::diag(&[1.0, 2.0]), i2.clone()).unwrap(),
            DEFAULT_TOL,
        );
        assert_eq!(v.verdict, Verdict::RankN);

        let v = classify_rank(&Tensor3::new(i2.clone(), i2).unwrap(), DEFAULT_TOL);
        assert_eq!(v.verdict, Verdict::RankN);
        assert!(v.low_margin());
        assert!(v.to_string().contains("warning"));
    }

    #[test]
    fn degenerate_pencil_is_a_verdict() {
        let z = MatrixR::zeros(2);
        let v = classify_rank(&Tensor3::new(z.clone(), z).unwrap(), DEFAULT_TOL);
        assert_eq!(v.verdict, Verdict::Degenerate);
        assert_eq!(v.rank(), None);
    }

    #[test]
    fn diagonal_decomposition() {
        let t = Tensor3::new(MatrixR::diag(&[3.0, 5.0]), MatrixR::identity(2)).unwrap();
        let d = decompose_rank_n(&t, DEFAULT_TOL).unwrap();
        assert!(d.relative_error < 1e-12);
        let mut ratios: Vec<f64> = d.factors.w.iter().map(|w| w[0] / w[1]).collect();
        ratios.sort_by(|a, b| a.total_cmp(b));
        assert!((ratios[0] - 3.0).abs() < 1e-12 && (ratios[1] - 5.0).abs() < 1e-12);
        for u in &d.factors.u {
            assert_eq!(u.iter().filter(|x| x.abs() > 1e-12).count(), 1);
        }
    }

    #[test]
    fn decomposition_refusals() {
        let i2 = MatrixR::identity(2);
        let rot = Tensor3::new(i2.clone(), rotation()).unwrap();
        assert!(matches!(
            decompose_rank_n(&rot, DEFAULT_TOL),
            Err(RankError::NotRankN {
                real_count: 0,
                n: 2
            })
        ));
        let same = Tensor3::new(i2.clone(), i2).unwrap();
        assert!(matches!(
            decompose_rank_n(&same, DEFAULT_TOL),
            Err(RankError::RepeatedEigenvalues { .. })
        ));
    }

    #[test]
    fn singular_second_slice_uses_first() {
        let t = Tensor3::new(MatrixR::identity(2), MatrixR::diag(&[0.0, 2.0])).unwrap();
        let d = decompose_rank_n(&t, DEFAULT_TOL).unwrap();
        assert!(d.relative_error < 1e-14);
        assert!(d.eigenvalues.iter().any(|v| v.is_infinite()));
    }

    #[test]
    fn reconstruct_examples() {
        let f = CPFactors {
            r: 1,
            u: vec![vec![1.0, 0.0]],
            v: vec![vec![0.0, 1.0]],
            w: vec![[1.0, 0.0]],
        };
        let t = reconstruct(&f, 2).unwrap();
        assert_eq!(t.slice1().rows(), vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(t.slice2(), &MatrixR::zeros(2));

        let empty = CPFactors {
            r: 0,
            u: vec![],
            v: vec![],
            w: vec![],
        };
        let t = reconstruct(&empty, 3).unwrap();
        assert_eq!(t.frobenius_norm(), 0.0);
        assert!(matches!(
            reconstruct(&f, 3),
            Err(RankError::DimensionError(_))
        ));
    }

    #[test]
    fn planted_tensor_is_rank_n() {
        let t = Tensor3::planted_rank_n(6, RngState::new(1, 0)).unwrap();
        let d = decompose_rank_n(&t, DEFAULT_TOL).unwrap();
        assert!(d.relative_error < 1e-8, "{}", d.relative_error);
    }
}
