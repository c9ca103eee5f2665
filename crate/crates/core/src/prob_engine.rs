//! Exact and asymptotic rank probabilities `P_N`.
//!
//! Four independent exact evaluations are provided so they can be checked
//! against each other:
//!
//! * [`p_rank_direct`]: `Γ((N+1)/2)^N / G(N+1)`;
//! * [`p_rank_explicit`]: the expanded even/odd power products;
//! * [`p_rank_genfunc`]: the leading coefficient of the real-eigenvalue
//!   generating function, before any gamma-function simplification;
//! * [`p_rank_recursive`]: the one-step gamma-ratio recursion from `P_1`, `P_2`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::{
    barnes_g, double_factorial, factorial, gamma_half, HalfInteger, PiRational,
};

/// Glaisher–Kinkelin constant `A = exp(1/12 - ζ'(-1))`, 30 significant digits.
pub const GLAISHER_A_DIGITS: &str = "1.28242712910062263687534256887";
/// `ζ'(-1)` to 30 significant digits.
pub const ZETA_PRIME_MINUS_ONE_DIGITS: &str = "-0.165421143700450929213919660243";

pub const GLAISHER_A: f64 = 1.282_427_129_100_622_6;
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProbError {
    #[error("{route} requires n >= {min}, got {n}")]
    DimensionTooSmall {
        route: &'static str,
        n: u32,
        min: u32,
    },
}

fn require(route: &'static str, n: u32, min: u32) -> Result<(), ProbError> {
    if n < min {
        Err(ProbError::DimensionTooSmall { route, n, min })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    Direct,
    Explicit,
    GenFunc,
    Recursion,
}

/// Probability of rank `n + 1`, i.e. `1 - P_N`.
///
/// Exact when `P_N` is rational; for even `N` it is transcendental and kept
/// as the symbolic difference.
#[derive(Clone, Debug, PartialEq)]
pub enum Complement {
    Exact(PiRational),
    OneMinus(PiRational),
}

impl Complement {
    pub fn of(p: &PiRational) -> Self {
        if p.is_rational() {
            Complement::Exact(PiRational::rational(BigRational::one() - p.coeff()))
        } else {
            Complement::OneMinus(p.clone())
        }
    }

    pub fn to_decimal(&self, digits: usize) -> String {
        match self {
            Complement::Exact(q) => q.to_decimal(digits),
            Complement::OneMinus(p) => p.complement_decimal(digits),
        }
    }

    pub fn symbolic(&self) -> String {
        match self {
            Complement::Exact(q) => q.to_string(),
            Complement::OneMinus(p) => format!("1 - {p}"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Complement::Exact(q) => q.to_f64(),
            Complement::OneMinus(p) => 1.0 - p.to_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankProbability {
    pub n: u32,
    pub p_rank_n: PiRational,
    pub p_rank_n_plus_1: Complement,
    pub route: Route,
}

impl RankProbability {
    pub fn compute(n: u32, route: Route) -> Result<Self, ProbError> {
        let p = match route {
            Route::Direct => p_rank_direct(n)?,
            Route::Explicit => p_rank_explicit(n)?,
            Route::GenFunc => p_rank_genfunc(n)?,
            Route::Recursion => p_rank_recursive(n)?,
        };
        Ok(Self {
            n,
            p_rank_n_plus_1: Complement::of(&p),
            p_rank_n: p,
            route,
        })
    }
}

fn half(twice: u32) -> HalfInteger {
    HalfInteger::from_twice(twice).expect("gamma arguments in P_N are positive")
}

fn int(value: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(value.into())
}

fn big(value: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

fn pow2(exp: u32) -> BigRational {
    int(BigInt::one() << exp)
}

/// `Γ((n+1)/2)^n / G(n+1)`.
pub fn p_rank_direct(n: u32) -> Result<PiRational, ProbError> {
    require("direct", n, 1)?;
    let numerator = gamma_half(half(n + 1)).pow(n);
    Ok(numerator.scale(&big(barnes_g(n + 1)).recip()))
}

/// Expanded products. Even `N`:
/// `π^(N/2) (N-1)^(N-1) (N-3)^(N-3) ... 3³ / (2^(N²/2) (N-2)² (N-4)⁴ ... 2^(N-2))`;
/// odd `N`:
/// `(N-1)^(N-1) (N-3)^(N-3) ... 2² / (2^(N(N-1)/2) (N-2)² (N-4)⁴ ... 3^(N-3))`.
pub fn p_rank_explicit(n: u32) -> Result<PiRational, ProbError> {
    require("explicit", n, 1)?;
    let even = n % 2 == 0;
    // Numerator bases run down from N-1 in steps of two, stopping at 3 (even
    // N) or 2 (odd N).
    let last_base = if even { 3 } else { 2 };
    let mut numerator = BigUint::one();
    let mut base = n as i64 - 1;
    while base >= last_base {
        numerator *= num_traits::pow(BigUint::from(base as u64), base as usize);
        base -= 2;
    }
    // Denominator (N-2j)^(2j) for j = 1, 2, ... while the base stays >= 2
    // (even N) or >= 3 (odd N).
    let min_denominator_base = if even { 2 } else { 3 };
    let mut denominator = BigUint::one();
    let mut j = 1i64;
    while n as i64 - 2 * j >= min_denominator_base {
        let b = n as i64 - 2 * j;
        denominator *= num_traits::pow(BigUint::from(b as u64), (2 * j) as usize);
        j += 1;
    }
    let power_of_two = if even { n * n / 2 } else { n * (n - 1) / 2 };
    let coeff = big(numerator) / (big(denominator) * pow2(power_of_two));
    let pi_half_pow = if even { n } else { 0 };
    Ok(PiRational::new(coeff, pi_half_pow))
}

/// `∏_{j=1}^{N} Γ(j/2)²`.
fn gamma_square_product(n: u32) -> PiRational {
    (1..=n).fold(PiRational::one(), |acc, j| {
        &acc * &gamma_half(half(j)).pow(2)
    })
}

/// Sign `(-1)^(e/8)` where `e` must be a multiple of eight.
fn sign_from_eighths(e: u64) -> BigRational {
    assert_eq!(e % 8, 0, "sign exponent {e}/8 is not an integer");
    if (e / 8) % 2 == 0 {
        int(1)
    } else {
        int(-1)
    }
}

/// Leading (`ξ^N`) coefficient of the generating function of real-eigenvalue
/// counts, in its unsimplified form.
///
/// Even `N`:
/// `(-1)^(N(N-2)/8) (2π)^(N/2) Γ((N+1)/2)^N / (2^(N(N-1)/2) ∏Γ(j/2)²) · ∏_{l=0}^{(N-2)/2} 1/(N-1-4l)`.
///
/// Odd `N`:
/// `(-1)^((N-1)(N-3)/8) (2π)^((N+1)/2) Γ((N+1)/2)^N / (2^(N(N-1)/2+1) ∏Γ(j/2)²)
///  · ∏_{l=0}^{c-1} 1/(N-1-4l) · ∏_{l=c}^{(N-3)/2} 1/(N-3-4l)` with `c = ⌈(N-1)/4⌉`.
///
/// The factors `1/(N-1-4l)` and `1/(N-3-4l)` are what remains of the
/// `α_l` and `α_{l+1/2}` coefficients once their gamma ratio is absorbed into
/// the prefactor; the `β` coefficients never contribute to the top degree.
pub fn p_rank_genfunc(n: u32) -> Result<PiRational, ProbError> {
    require("genfunc", n, 1)?;
    let nn = i64::from(n);
    let gamma_power = gamma_half(half(n + 1)).pow(n);
    let denominator_gammas = gamma_square_product(n);

    let (sign, two_pi_power, two_power, alpha_product) = if n % 2 == 0 {
        let sign = sign_from_eighths((n as u64) * (n as u64 - 2));
        let mut alpha = int(1);
        for l in 0..=(nn - 2) / 2 {
            alpha /= int(nn - 1 - 4 * l);
        }
        (sign, n / 2, n * (n - 1) / 2, alpha)
    } else {
        let sign = sign_from_eighths((n as u64 - 1) * (n as u64).saturating_sub(3));
        let split = (nn - 1 + 3) / 4; // ⌈(N-1)/4⌉
        let mut alpha = int(1);
        for l in 0..split {
            alpha /= int(nn - 1 - 4 * l);
        }
        for l in split..=(nn - 3) / 2 {
            alpha /= int(nn - 3 - 4 * l);
        }
        (sign, (n + 1) / 2, n * (n - 1) / 2 + 1, alpha)
    };

    // (2π)^k = 2^k · π^k
    let two_pi = PiRational::new(pow2(two_pi_power), 2 * two_pi_power);
    let numerator = (&two_pi * &gamma_power).scale(&sign);
    let value = numerator
        .checked_div(&denominator_gammas)
        .expect("π powers cancel: numerator carries π^(N/2) or more")
        .scale(&(alpha_product / pow2(two_power)));
    Ok(value)
}

/// `P_{N+1} / P_N = Γ(N/2+1)^(N+1) / (Γ((N+1)/2)^N · N!)`, applied to `p_n`.
pub fn step_one(n: u32, p_n: &PiRational) -> PiRational {
    let up = gamma_half(half(n + 2)).pow(n + 1);
    let down = gamma_half(half(n + 1)).pow(n);
    (p_n * &up)
        .checked_div(&down)
        .expect("P_N carries the π power of Γ((N+1)/2)^N")
        .scale(&big(factorial(n)).recip())
}

/// `P_{N+2} / P_N = ((N+1)/2)^(N+2) Γ((N+1)/2)² / (Γ(N+2) Γ(N+1))`.
pub fn step_two_factor(n: u32) -> PiRational {
    let base = BigRational::new(BigInt::from(n + 1), BigInt::from(2));
    gamma_half(half(n + 1))
        .pow(2)
        .scale(&num_traits::pow(base, n as usize + 2))
        .scale(&(big(factorial(n + 1)) * big(factorial(n))).recip())
}

/// Step-two factor written with double factorials:
/// even `N`: `(π/2)(N+1)^(N+1) / (2^(2N+1) (N!!)²)`;
/// odd `N`: `(N+1)^(N+1) / (2^(2N+1) (N!!)²)`.
pub fn step_two_factor_double_factorial(n: u32) -> PiRational {
    let df = big(double_factorial(i64::from(n)));
    let mut coeff = int(BigInt::from(n + 1).pow(n + 1)) / (pow2(2 * n + 1) * &df * &df);
    let mut h = 0;
    if n % 2 == 0 {
        coeff /= int(2);
        h = 2;
    }
    PiRational::new(coeff, h)
}

/// Step-one factor written with double factorials, applied to `p_n`:
/// even `N`: `(N!!)^N / ((2π)^(N/2) ((N-1)!!)^(N+1))`;
/// odd `N`: `π^((N+1)/2) (N!!)^N / (2^((3N+1)/2) ((N-1)!!)^(N+1))`.
pub fn step_one_double_factorial(n: u32, p_n: &PiRational) -> PiRational {
    let nn = i64::from(n);
    let top = num_traits::pow(big(double_factorial(nn)), n as usize);
    let bottom = num_traits::pow(big(double_factorial(nn - 1)), n as usize + 1);
    if n % 2 == 0 {
        let two_pi = PiRational::new(pow2(n / 2), n);
        p_n.checked_div(&two_pi)
            .expect("even P_N carries π^(N/2)")
            .scale(&(top / bottom))
    } else {
        let pi = PiRational::pi_power(n + 1);
        (p_n * &pi).scale(&(top / (bottom * pow2((3 * n + 1) / 2))))
    }
}

/// Builds up from `P_1 = 1`, `P_2 = π/4` with the one-step recursion.
pub fn p_rank_recursive(n: u32) -> Result<PiRational, ProbError> {
    require("recursion", n, 1)?;
    if n == 1 {
        return Ok(PiRational::one());
    }
    let mut p = PiRational::from_ratio(1, 4, 2);
    for m in 2..n {
        p = step_one(m, &p);
    }
    Ok(p)
}

/// Alternative recursion along `N ≡ n (mod 2)` using the step-two factor.
pub fn p_rank_recursive_step_two(n: u32) -> Result<PiRational, ProbError> {
    require("step-two recursion", n, 1)?;
    let (mut m, mut p) = if n % 2 == 1 {
        (1, PiRational::one())
    } else {
        (2, PiRational::from_ratio(1, 4, 2))
    };
    while m < n {
        p = &p * &step_two_factor_double_factorial(m);
        m += 2;
    }
    Ok(p)
}

/// Natural log of an exact probability.
pub fn exact_log(p: &PiRational) -> f64 {
    p.ln_abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub n: u32,
    pub log_p: f64,
    pub glaisher_a: f64,
    pub zeta_prime_minus1: f64,
}

impl AsymptoticEstimate {
    /// `log(N^(1/12) (e/4)^(N²/4) A e^(-1/6))`, evaluated as a product.
    pub fn product_form_log(&self) -> f64 {
        let n = f64::from(self.n);
        let e = std::f64::consts::E;
        (n.powf(1.0 / 12.0) * (e / 4.0).powf(n * n / 4.0) * self.glaisher_a * (-1.0f64 / 6.0).exp())
            .ln()
    }

    pub fn probability(&self) -> f64 {
        self.log_p.exp()
    }
}

/// `log P_N ≈ (N²/4) log(e/4) + (log N - 1)/12 - ζ'(-1)`.
pub fn log_p_asymptotic(n: u32) -> Result<AsymptoticEstimate, ProbError> {
    require("asymptotic", n, 1)?;
    let nf = f64::from(n);
    let log_p = nf * nf / 4.0 * (1.0 - 4f64.ln()) + (nf.ln() - 1.0) / 12.0 - ZETA_PRIME_MINUS_ONE;
    Ok(AsymptoticEstimate {
        n,
        log_p,
        glaisher_a: GLAISHER_A,
        zeta_prime_minus1: ZETA_PRIME_MINUS_ONE,
    })
}

/// `log P_N (exact) - log P_N (asymptotic)`.
pub fn asymptotic_residual(n: u32) -> Result<f64, ProbError> {
    Ok(exact_log(&p_rank_direct(n)?) - log_p_asymptotic(n)?.log_p)
}

/// Leading-order `P_{N+1}/P_N ≈ (e/4)^((2N+1)/4)`.
pub fn ratio_asymptotic(n: u32) -> Result<f64, ProbError> {
    require("ratio", n, 1)?;
    Ok((std::f64::consts::E / 4.0).powf((2.0 * f64::from(n) + 1.0) / 4.0))
}

/// Exact `P_{N+1}/P_N` in double precision.
pub fn ratio_exact(n: u32) -> Result<f64, ProbError> {
    Ok((exact_log(&p_rank_direct(n + 1)?) - exact_log(&p_rank_direct(n)?)).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u32,
    /// Reduced form, e.g. `27π²/1024`.
    pub exact: String,
    /// Prime-factored form, e.g. `3³·π²/2¹⁰`.
    pub factored: String,
    pub decimal: String,
    pub rank_n_plus_1_decimal: String,
}

pub fn probability_table(n_max: u32, digits: usize) -> Result<Vec<TableRow>, ProbError> {
    require("table", n_max, 1)?;
    (1..=n_max)
        .map(|n| {
            let p = p_rank_direct(n)?;
            Ok(TableRow {
                n,
                exact: p.to_string(),
                factored: p.factored(),
                decimal: p.to_decimal(digits),
                rank_n_plus_1_decimal: Complement::of(&p).to_decimal(digits),
            })
        })
        .collect()
}
