//! Decimal rendering of exact values.
//!
//! Values containing pi are enclosed in a rational interval built from a
//! fixed-point Machin series for pi. Rendering rounds both interval ends and
//! only accepts the result once they agree, refining the enclosure otherwise,
//! so the emitted digits are correctly rounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::PiRational;

/// Extra decimal places carried by the Machin series beyond the requested scale.
const SERIES_GUARD: u32 = 10;
/// Minimum guard digits used for the first enclosure attempt.
const RENDER_GUARD: u32 = 12;

fn pow10(exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), exp as usize)
}

fn pow10_rational(exp: i64) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(pow10(exp as u32))
    } else {
        BigRational::new(BigInt::one(), pow10((-exp) as u32))
    }
}

/// `atan(1/x) * scale`, truncated term by term.
fn arctan_inv(x: u32, scale: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x_sq = &x * &x;
    let mut power = scale / &x;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x_sq;
        k += 1;
    }
    sum
}

/// Integers `(lo, hi)` with `lo <= pi * 10^scale_digits <= hi`.
fn pi_bounds(scale_digits: u32) -> (BigInt, BigInt) {
    let scale = pow10(scale_digits + SERIES_GUARD);
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239). The truncation error is a few
    // units per series term, far below 10^SERIES_GUARD units.
    let value = arctan_inv(5, &scale) * 16 - arctan_inv(239, &scale) * 4;
    let lo = value / pow10(SERIES_GUARD) - 1;
    let hi = &lo + 2;
    (lo, hi)
}

/// Closed rational interval known to contain a value.
#[derive(Clone, Debug, PartialEq)]
pub struct DecimalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl DecimalInterval {
    pub fn exact(value: BigRational) -> Self {
        Self {
            lo: value.clone(),
            hi: value,
        }
    }

    /// Enclose `x` using pi to `scale_digits` decimal places.
    pub fn of(x: &PiRational, scale_digits: u32) -> Self {
        if x.is_rational() {
            return Self::exact(x.coeff().clone());
        }
        let scale_digits = scale_digits.max(8);
        let scale = pow10(scale_digits);
        let (pi_lo, pi_hi) = pi_bounds(scale_digits);
        let whole = x.pi_half_pow() / 2;
        let odd = x.pi_half_pow() % 2 == 1;

        let mut lo_num = num_traits::pow(pi_lo.clone(), whole as usize);
        let mut hi_num = num_traits::pow(pi_hi.clone(), whole as usize);
        let mut denom_exp = whole;
        if odd {
            lo_num *= (&pi_lo * &scale).sqrt();
            hi_num *= (&pi_hi * &scale).sqrt() + 1;
            denom_exp += 1;
        }
        let denom = num_traits::pow(scale, denom_exp as usize);
        let magnitude = x.coeff().abs();
        let lo = &magnitude * BigRational::new(lo_num, denom.clone());
        let hi = &magnitude * BigRational::new(hi_num, denom);
        if x.is_negative() {
            Self { lo: -hi, hi: -lo }
        } else {
            Self { lo, hi }
        }
    }

    /// Enclosure of `1 - value`.
    pub fn one_minus(&self) -> Self {
        Self {
            lo: BigRational::one() - &self.hi,
            hi: BigRational::one() - &self.lo,
        }
    }

    /// Rounded string if both ends round identically.
    pub fn try_round(&self, digits: usize) -> Option<String> {
        let lo = round_significant(&self.lo, digits);
        if self.lo == self.hi {
            return Some(lo);
        }
        let hi = round_significant(&self.hi, digits);
        (lo == hi).then_some(lo)
    }

    /// Round to `digits` significant digits, tightening the enclosure
    /// until both ends agree.
    pub fn render_with(digits: usize, enclose: impl Fn(u32) -> DecimalInterval) -> String {
        assert!(digits >= 1, "at least one significant digit is required");
        let mut scale = digits as u32 + RENDER_GUARD;
        loop {
            if let Some(s) = enclose(scale).try_round(digits) {
                return s;
            }
            scale *= 2;
        }
    }
}

impl PiRational {
    /// Decimal expansion of `1 - self`.
    pub fn complement_decimal(&self, digits: usize) -> String {
        DecimalInterval::render_with(digits, |w| DecimalInterval::of(self, w).one_minus())
    }

    pub(crate) fn decimal_refined(&self, digits: usize) -> String {
        DecimalInterval::render_with(digits, |w| DecimalInterval::of(self, w))
    }
}

/// Pi to `digits` significant digits.
pub fn pi_decimal(digits: usize) -> String {
    PiRational::pi_power(2).decimal_refined(digits)
}

/// Round an exact rational to `digits` significant digits, ties to even.
///
/// Positional notation is used for decimal exponents in `[-6, digits)`,
/// scientific notation (`1.0976e-7`) otherwise.
pub fn round_significant(x: &BigRational, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit is required");
    if x.is_zero() {
        return positional(&"0".repeat(digits), 0);
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let x = x.abs();

    let mut exp = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    while x < pow10_rational(exp) {
        exp -= 1;
    }
    while x >= pow10_rational(exp + 1) {
        exp += 1;
    }

    let scaled = &x * pow10_rational(digits as i64 - 1 - exp);
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut mantissa = floor.to_integer();
    if frac > half || (frac == half && (&mantissa % 2u32) == BigInt::one()) {
        mantissa += 1;
    }
    if mantissa == pow10(digits as u32) {
        mantissa /= 10;
        exp += 1;
    }
    let body = mantissa.to_string();
    let text = if (-6..digits as i64).contains(&exp) {
        positional(&body, exp)
    } else {
        let (lead, rest) = body.split_at(1);
        if rest.is_empty() {
            format!("{lead}e{exp}")
        } else {
            format!("{lead}.{rest}e{exp}")
        }
    };
    format!("{sign}{text}")
}

fn positional(body: &str, exp: i64) -> String {
    if exp >= 0 {
        let split = (exp as usize + 1).min(body.len());
        let (int, frac) = body.split_at(split);
        let int = format!("{int}{}", "0".repeat(exp as usize + 1 - split));
        if frac.is_empty() {
            int
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{body}", "0".repeat((-exp - 1) as usize))
    }
}
