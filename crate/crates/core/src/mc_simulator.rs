//! Monte Carlo estimates of real eigenvalue counts.
//!
//! Trial `i` always draws from RNG stream `i`, and per-trial outcomes are
//! aggregated by commutative addition, so a run is a pure function of
//! `(n, trials, seed, tol)` whatever the number of worker threads.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{
    real_generalized_eigencount, real_schur_eigen, EigenClassification, LinalgError,
};
use crate::prob_engine::p_rank_direct;
use crate::rng::{RngState, GENERATOR};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalKDistribution {
    pub n: usize,
    pub trials: u64,
    pub counts: BTreeMap<usize, u64>,
    /// Trials with a 2x2 block inside the classification dead-band.
    pub ambiguous: u64,
    /// Trials where both slices were ill-conditioned or QR did not converge.
    pub degenerate: u64,
    pub seed: u64,
    pub tol: f64,
    pub generator: &'static str,
}

impl EmpiricalKDistribution {
    /// Trials that produced a definite count.
    pub fn tallied(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn tally(&self, k: usize) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Fraction of tallied trials with `k` real eigenvalues.
    pub fn frequency(&self, k: usize) -> f64 {
        let m = self.tallied();
        if m == 0 {
            return f64::NAN;
        }
        self.tally(k) as f64 / m as f64
    }

    /// Tallied counts whose parity differs from `n`.
    pub fn wrong_parity(&self) -> Vec<usize> {
        self.counts
            .iter()
            .filter(|(&k, &c)| c > 0 && (k % 2 != self.n % 2 || k > self.n))
            .map(|(&k, _)| k)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Count(usize),
    Ambiguous,
    Degenerate,
}

fn outcome(result: Result<EigenClassification, LinalgError>) -> Outcome {
    match result {
        Ok(c) if c.is_ambiguous() => Outcome::Ambiguous,
        Ok(c) => Outcome::Count(c.real_count),
        Err(_) => Outcome::Degenerate,
    }
}

#[derive(Clone, Default)]
struct Tally {
    counts: Vec<u64>,
    ambiguous: u64,
    degenerate: u64,
}

impl Tally {
    fn with_len(n: usize) -> Self {
        Self {
            counts: vec![0; n + 1],
            ..Self::default()
        }
    }

    fn add(mut self, o: Outcome) -> Self {
        match o {
            Outcome::Count(k) => self.counts[k] += 1,
            Outcome::Ambiguous => self.ambiguous += 1,
            Outcome::Degenerate => self.degenerate += 1,
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.ambiguous += other.ambiguous;
        self.degenerate += other.degenerate;
        self
    }
}

fn simulate<F>(n: usize, trials: u64, seed: u64, tol: f64, trial: F) -> EmpiricalKDistribution
where
    F: Fn(RngState) -> Outcome + Sync,
{
    assert!(n >= 1, "dimension must be at least 1");
    assert!(trials >= 1, "at least one trial is required");
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| trial(RngState::new(seed, i)))
        .fold(|| Tally::with_len(n), Tally::add)
        .reduce(|| Tally::with_len(n), Tally::merge);
    let counts = tally
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (k, c))
        .collect();
    EmpiricalKDistribution {
        n,
        trials,
        counts,
        ambiguous: tally.ambiguous,
        degenerate: tally.degenerate,
        seed,
        tol,
        generator: GENERATOR,
    }
}

/// Real root counts of `det(T1 - λ T2) = 0` for Gaussian slice pairs.
pub fn run_trials(n: usize, trials: u64, seed: u64, tol: f64) -> EmpiricalKDistribution {
    simulate(n, trials, seed, tol, |state| {
        let mut g = state.generator();
        let t1 = g.gaussian_matrix(n);
        let t2 = g.gaussian_matrix(n);
        outcome(real_generalized_eigencount(&t1, &t2, tol))
    })
}

/// Real eigenvalue counts of single Gaussian matrices.
pub fn run_ginibre_trials(n: usize, trials: u64, seed: u64, tol: f64) -> EmpiricalKDistribution {
    simulate(n, trials, seed, tol, |state| {
        let g = state.generator().gaussian_matrix(n);
        outcome(real_schur_eigen(&g, tol))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub p_hat: f64,
    pub p_exact: f64,
    pub z_score: f64,
    pub ci95: (f64, f64),
    pub trials: u64,
    /// Trials entering `p_hat`; ambiguous and degenerate ones are excluded.
    pub tallied: u64,
    pub ambiguous: u64,
    pub degenerate: u64,
    pub seed: u64,
    pub tol: f64,
}

impl TestReport {
    /// Build from `hits` successes out of `dist.tallied()` trials.
    pub fn from_distribution(dist: &EmpiricalKDistribution, hits: u64, p_exact: f64) -> Self {
        let m = dist.tallied();
        let p_hat = if m > 0 {
            hits as f64 / m as f64
        } else {
            f64::NAN
        };
        Self {
            n: dist.n,
            p_hat,
            p_exact,
            z_score: z_score(p_hat, p_exact, m),
            ci95: wilson_interval(hits, m),
            trials: dist.trials,
            tallied: m,
            ambiguous: dist.ambiguous,
            degenerate: dist.degenerate,
            seed: dist.seed,
            tol: dist.tol,
        }
    }

    pub fn passes(&self, z_max: f64) -> bool {
        self.z_score.abs() < z_max
    }
}

/// `(p̂ - p) / sqrt(p(1-p)/m)`; zero when a degenerate target is hit exactly.
pub fn z_score(p_hat: f64, p: f64, m: u64) -> f64 {
    let var = p * (1.0 - p);
    if var <= 0.0 || m == 0 {
        return if p_hat == p { 0.0 } else { f64::INFINITY };
    }
    (p_hat - p) / (var / m as f64).sqrt()
}

/// Wilson score interval at 95%.
pub fn wilson_interval(hits: u64, m: u64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let mf = m as f64;
    let p = hits as f64 / mf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / mf;
    let centre = (p + z2 / (2.0 * mf)) / denom;
    let half = Z95 * (p * (1.0 - p) / mf + z2 / (4.0 * mf * mf)).sqrt() / denom;
    (
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    )
}

/// Exact `P_N` as a double.
pub fn exact_rank_probability(n: usize) -> f64 {
    let n = u32::try_from(n).expect("dimension fits in u32");
    p_rank_direct(n).expect("n >= 1").to_f64()
}

/// Frequency of `k = n` against the exact `P_N`.
pub fn estimate_rank_probability(n: usize, trials: u64, seed: u64, tol: f64) -> TestReport {
    rank_report(&run_trials(n, trials, seed, tol))
}

pub fn rank_report(dist: &EmpiricalKDistribution) -> TestReport {
    TestReport::from_distribution(dist, dist.tally(dist.n), exact_rank_probability(dist.n))
}

/// `2^(-n(n-1)/4)`, the all-real probability for a real Ginibre matrix.
pub fn ginibre_all_real_probability(n: usize) -> f64 {
    let n = n as f64;
    (-n * (n - 1.0) / 4.0).exp2()
}

pub fn ginibre_all_real_check(n: usize, trials: u64, seed: u64, tol: f64) -> TestReport {
    ginibre_report(&run_ginibre_trials(n, trials, seed, tol))
}

pub fn ginibre_report(dist: &EmpiricalKDistribution) -> TestReport {
    TestReport::from_distribution(
        dist,
        dist.tally(dist.n),
        ginibre_all_real_probability(dist.n),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub tallied: u64,
    pub mean: f64,
    pub variance: f64,
    /// Standardised third moment; near zero for a Gaussian-shaped distribution.
    pub skewness: f64,
    /// Leading-order mean `sqrt(π n / 2)`.
    pub mean_leading: f64,
    /// Leading-order `variance / mean = 2 - sqrt(2)`.
    pub variance_ratio_leading: f64,
}

impl MomentReport {
    pub fn mean_relative_error(&self) -> f64 {
        (self.mean - self.mean_leading).abs() / self.mean_leading
    }

    pub fn variance_ratio_relative_error(&self) -> f64 {
        (self.variance / self.mean - self.variance_ratio_leading).abs()
            / self.variance_ratio_leading
    }
}

pub fn moment_report(dist: &EmpiricalKDistribution) -> MomentReport {
    let m = dist.tallied() as f64;
    let mean = dist
        .counts
        .iter()
        .map(|(&k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / m;
    let central = |p: i32| {
        dist.counts
            .iter()
            .map(|(&k, &c)| (k as f64 - mean).powi(p) * c as f64)
            .sum::<f64>()
            / m
    };
    let variance = central(2);
    let skewness = if variance > 0.0 {
        central(3) / variance.powf(1.5)
    } else {
        0.0
    };
    MomentReport {
        n: dist.n,
        tallied: dist.tallied(),
        mean,
        variance,
        skewness,
        mean_leading: (std::f64::consts::PI * dist.n as f64 / 2.0).sqrt(),
        variance_ratio_leading: 2.0 - std::f64::consts::SQRT_2,
    }
}

pub const DISTRIBUTION_CSV_HEADER: &str = "n,k,tally,trials,seed,tol";
pub const REPORT_CSV_HEADER: &str = "n,p_hat,p_exact,z,ci_lo,ci_hi,trials";

/// One row per `k` of the parity of `n`, including zero tallies.
pub fn write_distribution_csv<W: Write>(
    dist: &EmpiricalKDistribution,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{DISTRIBUTION_CSV_HEADER}")?;
    for k in (dist.n % 2..=dist.n).step_by(2) {
        writeln!(
            out,
            "{},{},{},{},{},{:e}",
            dist.n,
            k,
            dist.tally(k),
            dist.trials,
            dist.seed,
            dist.tol
        )?;
    }
    Ok(())
}

pub fn write_report_csv<W: Write>(reports: &[TestReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.p_hat, r.p_exact, r.z_score, r.ci95.0, r.ci95.1, r.trials
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    #[test]
    fn one_by_one_is_always_real() {
        let r = estimate_rank_probability(1, 2_000, 3, DEFAULT_TOL);
        assert_eq!(r.p_hat, 1.0);
        assert_eq!(r.p_exact, 1.0);
        assert_eq!(r.z_score, 0.0);
        let g = ginibre_all_real_check(1, 500, 3, DEFAULT_TOL);
        assert_eq!(g.p_hat, 1.0);
    }

    #[test]
    fn two_point_mean_identity() {
        let d = run_trials(2, 5_000, 11, DEFAULT_TOL);
        assert_eq!(d.tally(1), 0);
        let m = moment_report(&d);
        assert!((m.mean - 2.0 * d.frequency(2)).abs() < 1e-12);
    }

    #[test]
    fn wilson_contains_estimate() {
        for (h, m) in [(0, 10), (10, 10), (3, 7), (785, 1000)] {
            let (lo, hi) = wilson_interval(h, m);
            let p = h as f64 / m as f64;
            assert!(lo <= p && p <= hi, "{h}/{m}: {lo} {hi}");
        }
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn ginibre_targets() {
        assert!((ginibre_all_real_probability(2) - 0.707_106_781).abs() < 1e-9);
        assert!((ginibre_all_real_probability(3) - 0.353_553_391).abs() < 1e-9);
        assert_eq!(ginibre_all_real_probability(4), 0.125);
    }

    #[test]
    fn csv_layout() {
        let d = run_trials(3, 100, 42, DEFAULT_TOL);
        let mut buf = Vec::new();
        write_distribution_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], DISTRIBUTION_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("3,1,"));
        assert!(lines[2].ends_with(",100,42,1e-10"));
    }
}
