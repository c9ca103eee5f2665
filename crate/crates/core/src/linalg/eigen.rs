//! Real Schur eigenvalue solver and real-eigenvalue counting for pencils.
//!
//! The pipeline is balancing, Householder reduction to upper Hessenberg form,
//! then Francis double-shift QR with deflation. Converged 2x2 diagonal blocks
//! are classified by their discriminant against a symmetric dead-band so that
//! near-boundary cases are reported instead of silently guessed.

use serde::Serialize;

use super::lu::Lu;
use super::{LinalgError, MatrixR};

/// Default relative dead-band for 2x2 block classification.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Slices whose condition estimate exceeds this are not inverted.
pub const ILL_CONDITIONED: f64 = 1e12;

const SWEEPS_PER_DIM: usize = 40;
const EXCEPTIONAL_EVERY: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenClassification {
    pub n: usize,
    pub real_count: usize,
    pub complex_pair_count: usize,
    pub real_eigenvalues: Vec<f64>,
    /// `(re, im)` with `im > 0`, one entry per conjugate pair.
    pub complex_eigenvalues: Vec<(f64, f64)>,
    /// Smallest `|disc| / ‖block‖²_F` over converged 2x2 blocks; infinite when
    /// every eigenvalue deflated as a 1x1 block.
    pub min_block_margin: f64,
    /// 2x2 blocks whose discriminant fell inside the dead-band.
    pub ambiguous_blocks: usize,
    pub iterations_used: usize,
}

impl EigenClassification {
    pub fn is_ambiguous(&self) -> bool {
        self.ambiguous_blocks > 0
    }

    pub fn all_real(&self) -> bool {
        self.real_count == self.n
    }
}

/// Quasi-triangular `t` with `a = q t qᵀ` (in balanced coordinates when
/// produced by [`SchurForm::compute`]).
#[derive(Clone, Debug)]
pub struct SchurForm {
    pub t: MatrixR,
    pub q: MatrixR,
    /// Diagonal balancing scale `d`: original `a = D b D⁻¹`.
    pub scale: Vec<f64>,
    pub classification: EigenClassification,
    /// Diagonal position of each entry of `classification.real_eigenvalues`.
    pub real_positions: Vec<usize>,
}

/// Diagonal similarity `b = D⁻¹ a D` with power-of-two scales.
pub fn balance(a: &MatrixR) -> (MatrixR, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.n();
    let mut b = a.clone();
    let mut scale = vec![1.0; n];
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    (b, scale)
}

/// Householder reduction `a = q h qᵀ`; `q` is only formed when requested.
pub fn hessenberg(a: &MatrixR, accumulate: bool) -> (MatrixR, Option<MatrixR>) {
    let n = a.n();
    let mut h = a.clone();
    let mut q = accumulate.then(|| MatrixR::identity(n));
    let mut v = vec![0.0; n];
    for m in 1..n.saturating_sub(1) {
        let scale: f64 = (m..n).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut sigma = 0.0;
        for i in m..n {
            v[i] = h[(i, m - 1)] / scale;
            sigma += v[i] * v[i];
        }
        let mut g = sigma.sqrt();
        if v[m] > 0.0 {
            g = -g;
        }
        let beta = sigma - v[m] * g;
        v[m] -= g;

        // h <- (I - v vᵀ/β) h
        for j in m - 1..n {
            let f = (m..n).map(|i| v[i] * h[(i, j)]).sum::<f64>() / beta;
            for i in m..n {
                h[(i, j)] -= f * v[i];
            }
        }
        // h <- h (I - v vᵀ/β)
        for i in 0..n {
            let f = (m..n).map(|j| v[j] * h[(i, j)]).sum::<f64>() / beta;
            for j in m..n {
                h[(i, j)] -= f * v[j];
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let f = (m..n).map(|j| v[j] * q[(i, j)]).sum::<f64>() / beta;
                for j in m..n {
                    q[(i, j)] -= f * v[j];
                }
            }
        }
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
        h[(m, m - 1)] = scale * g;
    }
    (h, q)
}

struct QrResult {
    classification: EigenClassification,
    real_positions: Vec<usize>,
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// With `schur = Some(q)` the full quasi-triangular form is produced and the
/// transformations are accumulated into `q`; otherwise only the active window
/// is updated, which is enough for eigenvalues.
fn francis_qr(
    h: &mut MatrixR,
    mut schur: Option<&mut MatrixR>,
    tol: f64,
) -> Result<QrResult, LinalgError> {
    let nn = h.n();
    let full = schur.is_some();
    let eps = f64::EPSILON;
    let max_sweeps = SWEEPS_PER_DIM * nn.max(1);

    let mut real = Vec::new();
    let mut real_positions = Vec::new();
    let mut complex = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut ambiguous = 0usize;

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut exshift = 0.0;
    let mut sweeps = 0usize;
    let mut stalled = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);
    let mut n = nn as isize - 1;

    while n >= 0 {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // One root.
            h[(nu, nu)] += exshift;
            real.push(h[(nu, nu)]);
            real_positions.push(nu);
            n -= 1;
            stalled = 0;
        } else if l + 1 == nu {
            // Two roots: classify the converged 2x2 block.
            let a = h[(nu - 1, nu - 1)] + exshift;
            let b = h[(nu - 1, nu)];
            let c = h[(nu, nu - 1)];
            let d = h[(nu, nu)] + exshift;
            h[(nu - 1, nu - 1)] = a;
            h[(nu, nu)] = d;
            w = c * b;
            p = (a - d) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = d;

            let block_sq = a * a + b * b + c * c + d * d;
            let margin = if block_sq > 0.0 {
                q.abs() / block_sq
            } else {
                0.0
            };
            min_margin = min_margin.min(margin);
            if q.abs() <= tol * block_sq {
                ambiguous += 1;
            }

            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                let first = x + z;
                let second = if z != 0.0 { x - w / z } else { first };
                real.push(second);
                real_positions.push(nu);
                real.push(first);
                real_positions.push(nu - 1);
                if let Some(qm) = schur.as_deref_mut() {
                    // Rotate the block to upper triangular form.
                    x = h[(nu, nu - 1)];
                    s = x.abs() + z.abs();
                    let mut pr = x / s;
                    let mut qr = z / s;
                    let rr = (pr * pr + qr * qr).sqrt();
                    pr /= rr;
                    qr /= rr;
                    for j in nu - 1..nn {
                        let t = h[(nu - 1, j)];
                        h[(nu - 1, j)] = qr * t + pr * h[(nu, j)];
                        h[(nu, j)] = qr * h[(nu, j)] - pr * t;
                    }
                    for i in 0..=nu {
                        let t = h[(i, nu - 1)];
                        h[(i, nu - 1)] = qr * t + pr * h[(i, nu)];
                        h[(i, nu)] = qr * h[(i, nu)] - pr * t;
                    }
                    for i in 0..nn {
                        let t = qm[(i, nu - 1)];
                        qm[(i, nu - 1)] = qr * t + pr * qm[(i, nu)];
                        qm[(i, nu)] = qr * qm[(i, nu)] - pr * t;
                    }
                    h[(nu, nu - 1)] = 0.0;
                    // After the rotation the diagonal carries the eigenvalues.
                    let len = real.len();
                    real[len - 1] = h[(nu - 1, nu - 1)];
                    real[len - 2] = h[(nu, nu)];
                }
            } else {
                complex.push((x + p, z));
            }
            n -= 2;
            stalled = 0;
        } else {
            // Form shift.
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            if stalled > 0 && stalled % EXCEPTIONAL_EVERY == 0 {
                if (stalled / EXCEPTIONAL_EVERY) % 2 == 1 {
                    // Wilkinson's ad hoc shift.
                    exshift += x;
                    for i in 0..=nu {
                        h[(i, i)] -= x;
                    }
                    s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                } else {
                    s = (y - x) / 2.0;
                    s = s * s + w;
                    if s > 0.0 {
                        s = s.sqrt();
                        if y < x {
                            s = -s;
                        }
                        s = x - w / ((y - x) / 2.0 + s);
                        for i in 0..=nu {
                            h[(i, i)] -= s;
                        }
                        exshift += s;
                        x = 0.964;
                        y = x;
                        w = x;
                    }
                }
            }

            sweeps += 1;
            stalled += 1;
            if sweeps > max_sweeps {
                return Err(LinalgError::NoConvergence { sweeps: max_sweeps });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs =
                    eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            let row_end = if full { nn - 1 } else { nu };
            let col_start = if full { 0 } else { l };

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..=row_end {
                    let mut t = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        t += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= t * z;
                    }
                    h[(k, j)] -= t * x;
                    h[(k + 1, j)] -= t * y;
                }
                for i in col_start..=nu.min(k + 3) {
                    let mut t = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        t += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= t * r;
                    }
                    h[(i, k)] -= t;
                    h[(i, k + 1)] -= t * q;
                }
                if let Some(qm) = schur.as_deref_mut() {
                    for i in 0..nn {
                        let mut t = x * qm[(i, k)] + y * qm[(i, k + 1)];
                        if notlast {
                            t += z * qm[(i, k + 2)];
                            qm[(i, k + 2)] -= t * r;
                        }
                        qm[(i, k)] -= t;
                        qm[(i, k + 1)] -= t * q;
                    }
                }
            }
        }
    }

    if full {
        // Bulge-chasing leaves stale entries that the iteration treats as zero.
        for i in 2..nn {
            for j in 0..i - 1 {
                h[(i, j)] = 0.0;
            }
        }
    }

    Ok(QrResult {
        classification: EigenClassification {
            n: nn,
            real_count: real.len(),
            complex_pair_count: complex.len(),
            real_eigenvalues: real,
            complex_eigenvalues: complex,
            min_block_margin: min_margin,
            ambiguous_blocks: ambiguous,
            iterations_used: sweeps,
        },
        real_positions,
    })
}

fn check_finite(g: &MatrixR) -> Result<(), LinalgError> {
    if g.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Count and locate the real eigenvalues of `g`.
pub fn real_schur_eigen(g: &MatrixR, tol: f64) -> Result<EigenClassification, LinalgError> {
    assert!(tol > 0.0, "classification tolerance must be positive");
    check_finite(g)?;
    let (balanced, _) = balance(g);
    let (mut h, _) = hessenberg(&balanced, false);
    Ok(francis_qr(&mut h, None, tol)?.classification)
}

impl SchurForm {
    /// Full real Schur decomposition of the balanced matrix.
    pub fn compute(g: &MatrixR, tol: f64) -> Result<Self, LinalgError> {
        check_finite(g)?;
        let (balanced, scale) = balance(g);
        let (mut t, q) = hessenberg(&balanced, true);
        let mut q = q.expect("accumulation requested");
        let result = francis_qr(&mut t, Some(&mut q), tol)?;
        Ok(Self {
            t,
            q,
            scale,
            classification: result.classification,
            real_positions: result.real_positions,
        })
    }

    /// Schur vector `k` mapped back to unbalanced coordinates.
    pub fn schur_vector(&self, k: usize) -> Vec<f64> {
        (0..self.q.n())
            .map(|i| self.scale[i] * self.q[(i, k)])
            .collect()
    }
}

/// Which slice was inverted to form the standard eigenproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PencilSide {
    /// `G = T1⁻¹ T2`; its eigenvalues are `μ = 1/λ`.
    InvertT1,
    /// `G = T2⁻¹ T1`; its eigenvalues are `λ`.
    InvertT2,
}

fn check_pair(t1: &MatrixR, t2: &MatrixR) -> Result<(), LinalgError> {
    if t1.n() != t2.n() {
        return Err(LinalgError::DimensionMismatch {
            expected: t1.n(),
            got: t2.n(),
        });
    }
    Ok(())
}

fn factor_if_well_conditioned(a: &MatrixR) -> (Option<Lu>, f64) {
    match Lu::factor(a) {
        Ok(lu) => {
            let cond = lu.cond_estimate();
            if cond.is_finite() && cond <= ILL_CONDITIONED {
                (Some(lu), cond)
            } else {
                (None, cond)
            }
        }
        Err(_) => (None, f64::INFINITY),
    }
}

/// Count the real roots of `det(T1 - λ T2) = 0`.
///
/// `T1` is inverted unless it is ill-conditioned, in which case `T2` is used;
/// `λ ↦ 1/λ` preserves realness so the count is unaffected. The reported real
/// eigenvalues are the pencil roots `λ` (infinite for a zero `μ`).
pub fn real_generalized_eigencount(
    t1: &MatrixR,
    t2: &MatrixR,
    tol: f64,
) -> Result<EigenClassification, LinalgError> {
    check_pair(t1, t2)?;
    let (lu1, cond_t1) = factor_if_well_conditioned(t1);
    if let Some(lu) = lu1 {
        let g = lu.solve_matrix(t2);
        let mut c = real_schur_eigen(&g, tol)?;
        for v in &mut c.real_eigenvalues {
            *v = if *v == 0.0 { f64::INFINITY } else { 1.0 / *v };
        }
        return Ok(c);
    }
    let (lu2, cond_t2) = factor_if_well_conditioned(t2);
    match lu2 {
        Some(lu) => real_schur_eigen(&lu.solve_matrix(t1), tol),
        None => Err(LinalgError::DegeneratePencil { cond_t1, cond_t2 }),
    }
}

/// Real eigenpairs of a pencil for constructive decompositions.
///
/// With side `InvertT2` each pair satisfies `T1 x = θ T2 x`; with `InvertT1`
/// it satisfies `T2 x = θ T1 x`.
#[derive(Clone, Debug)]
pub struct PencilEigenpairs {
    pub side: PencilSide,
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, one per entry of `values`.
    pub vectors: Vec<Vec<f64>>,
    pub classification: EigenClassification,
}

/// Compute eigenvalues via the real Schur form and eigenvectors by inverse
/// iteration on the pencil, seeded from the Schur vectors.
///
/// `T2` is inverted when well-conditioned so that eigenvalues are the pencil
/// roots `λ` directly. Each Schur eigenvalue is polished by a pencil Rayleigh
/// quotient, since its error is amplified by `‖X⁻¹‖` in reconstructions. Only real eigenpairs are returned; callers check
/// `classification` for complex pairs.
pub fn pencil_eigenpairs(
    t1: &MatrixR,
    t2: &MatrixR,
    tol: f64,
) -> Result<PencilEigenpairs, LinalgError> {
    check_pair(t1, t2)?;
    let (lu2, cond_t2) = factor_if_well_conditioned(t2);
    let (side, numer, base, g) = match lu2 {
        Some(lu) => (PencilSide::InvertT2, t1, t2, lu.solve_matrix(t1)),
        None => {
            let (lu1, cond_t1) = factor_if_well_conditioned(t1);
            match lu1 {
                Some(lu) => (PencilSide::InvertT1, t2, t1, lu.solve_matrix(t2)),
                None => return Err(LinalgError::DegeneratePencil { cond_t1, cond_t2 }),
            }
        }
    };
    let schur = SchurForm::compute(&g, tol)?;
    let mut values = Vec::with_capacity(schur.classification.real_count);
    let mut vectors = Vec::with_capacity(schur.classification.real_count);
    for (&theta, &pos) in schur
        .classification
        .real_eigenvalues
        .iter()
        .zip(&schur.real_positions)
    {
        let seed = schur.schur_vector(pos);
        let (x, value) = inverse_iteration(numer, base, theta, seed);
        vectors.push(x);
        values.push(value);
    }
    Ok(PencilEigenpairs {
        side,
        values,
        vectors,
        classification: schur.classification,
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn inverse_solves(
    numer: &MatrixR,
    base: &MatrixR,
    theta: f64,
    mut x: Vec<f64>,
    steps: usize,
) -> Vec<f64> {
    let lu = Lu::factor_regularized(&numer.sub_scaled(theta, base));
    for _ in 0..steps {
        let mut rhs = base.matvec(&x);
        lu.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            break;
        }
        normalize(&mut rhs);
        x = rhs;
    }
    x
}

/// `θ` minimising `‖numer x - θ base x‖₂`.
fn pencil_rayleigh(numer: &MatrixR, base: &MatrixR, x: &[f64]) -> f64 {
    let ax = numer.matvec(x);
    let bx = base.matvec(x);
    let num: f64 = bx.iter().zip(&ax).map(|(b, a)| b * a).sum();
    let den: f64 = bx.iter().map(|b| b * b).sum();
    num / den
}

/// Inverse iteration on `(numer - θ base) x_new = base x_old`: two solves at
/// the Schur shift, then one more at the Rayleigh-quotient refined shift.
/// Returns the unit eigenvector and the refined eigenvalue.
fn inverse_iteration(
    numer: &MatrixR,
    base: &MatrixR,
    theta: f64,
    mut x: Vec<f64>,
) -> (Vec<f64>, f64) {
    normalize(&mut x);
    x = inverse_solves(numer, base, theta, x, 2);
    let mut value = theta;
    let refined = pencil_rayleigh(numer, base, &x);
    // Only a small correction is trusted; a large jump means `x` has not
    // settled on this eigenvalue.
    let trusted = (refined - theta).abs() <= 1e-4 * theta.abs().max(1.0);
    if refined.is_finite() && refined != theta && trusted {
        x = inverse_solves(numer, base, refined, x, 1);
        let again = pencil_rayleigh(numer, base, &x);
        value = if again.is_finite() { again } else { refined };
    }
    // Fix the sign so the largest component is positive.
    if let Some(&pivot) = x.iter().max_by(|a, b| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    }) {
        if pivot < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
    }
    (x, value)
}
