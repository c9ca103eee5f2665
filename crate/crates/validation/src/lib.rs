//! Pinned tolerances and budgets for the acceptance suite in `tests/acceptance.rs`.
//!
//! Run with `cargo test -p rankprob-validation --test acceptance`.

/// Golden table rows are compared with exact rational equality.
pub const GOLDEN_N: std::ops::RangeInclusive<u32> = 2..=13;
pub const GOLDEN_MAX_SECONDS: f64 = 1.0;

pub const ROUTES_N: std::ops::RangeInclusive<u32> = 1..=40;
pub const ROUTES_MAX_SECONDS: f64 = 5.0;

pub const ASYMPTOTIC_SMALL_N: u32 = 10;
pub const ASYMPTOTIC_LARGE_N: u32 = 40;
/// `40·|r_40| ≤ DECAY_FACTOR · 10·|r_10|`.
pub const DECAY_FACTOR: f64 = 2.0;
/// Absolute agreement of the two asymptotic forms at `N = 10`.
pub const FORMS_AGREEMENT: f64 = 1e-12;
pub const ASYMPTOTIC_MAX_SECONDS: f64 = 1.0;

/// Two-sided z threshold for every Monte Carlo comparison.
pub const Z_MAX: f64 = 4.0;
pub const SEED: u64 = 42;
pub const TOL: f64 = 1e-10;

pub const MC_N: [usize; 5] = [2, 3, 4, 5, 6];
pub const MC_TRIALS: u64 = 200_000;

pub const GINIBRE_N: [usize; 3] = [2, 3, 4];
pub const GINIBRE_TRIALS: u64 = 100_000;

pub const MOMENT_N: usize = 100;
pub const MOMENT_TRIALS: u64 = 10_000;
pub const MEAN_REL_TOL: f64 = 0.15;
pub const VARIANCE_RATIO_REL_TOL: f64 = 0.25;

pub const DECOMP_N: std::ops::RangeInclusive<usize> = 2..=12;
pub const DECOMP_PER_N: usize = 100;
pub const DECOMP_MAX_CONDITION: f64 = 1e8;
pub const DECOMP_MAX_ERROR: f64 = 1e-8;
/// Gaussian draws per `N` before planted real-spectrum tensors fill the quota.
pub const DECOMP_GAUSSIAN_BUDGET: u64 = 100_000;

pub const REPRO_N: u32 = 4;
pub const REPRO_TRIALS: u64 = 20_000;
