//! Exact arithmetic over numbers of the form `q * pi^(h/2)`.
//!
//! Every probability produced by this crate is a rational number times a
//! non-negative half-integer power of pi. [`PiRational`] stores that pair in
//! canonical form so that equality is structural, and the special-function
//! helpers here ([`gamma_half`], [`barnes_g`], [`double_factorial`]) return
//! exact values built on arbitrary-precision integers.

mod decimal;
mod format;

use std::fmt;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use decimal::{pi_decimal, round_significant, DecimalInterval};
pub use format::{factor_small_primes, superscript};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("result would carry pi^({0}/2) with a negative exponent")]
    NegativePiPower(i64),
    #[error("gamma has a pole at non-positive argument {0}/2")]
    GammaPole(i64),
}

/// Exact value `coeff * pi^(pi_half_pow / 2)`.
///
/// The coefficient is kept in lowest terms with a positive denominator, and
/// zero is always `(0/1, 0)`, so derived `PartialEq` is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiRational {
    coeff: BigRational,
    pi_half_pow: u32,
}

impl PiRational {
    pub fn new(coeff: BigRational, pi_half_pow: u32) -> Self {
        // BigRational::new already reduces and normalises the sign.
        if coeff.is_zero() {
            return Self::zero();
        }
        Self { coeff, pi_half_pow }
    }

    pub fn from_ratio(
        numer: impl Into<BigInt>,
        denom: impl Into<BigInt>,
        pi_half_pow: u32,
    ) -> Self {
        Self::new(BigRational::new(numer.into(), denom.into()), pi_half_pow)
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Self::new(BigRational::from_integer(value.into()), 0)
    }

    pub fn rational(coeff: BigRational) -> Self {
        Self::new(coeff, 0)
    }

    pub fn zero() -> Self {
        Self {
            coeff: BigRational::zero(),
            pi_half_pow: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// `pi^(h/2)` with unit coefficient.
    pub fn pi_power(pi_half_pow: u32) -> Self {
        Self::new(BigRational::one(), pi_half_pow)
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn pi_half_pow(&self) -> u32 {
        self.pi_half_pow
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.pi_half_pow == 0
    }

    pub fn is_negative(&self) -> bool {
        self.coeff.is_negative()
    }

    /// Multiply the coefficient by an exact rational.
    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(&self.coeff * factor, self.pi_half_pow)
    }

    pub fn checked_div(&self, rhs: &PiRational) -> Result<PiRational, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let h = i64::from(self.pi_half_pow) - i64::from(rhs.pi_half_pow);
        if h < 0 {
            return Err(ArithError::NegativePiPower(h));
        }
        Ok(Self::new(&self.coeff / &rhs.coeff, h as u32))
    }

    pub fn pow(&self, exponent: u32) -> Self {
        if exponent == 0 {
            return Self::one();
        }
        Self::new(
            num_traits::pow(self.coeff.clone(), exponent as usize),
            self.pi_half_pow * exponent,
        )
    }

    /// Natural logarithm of `|self|` in double precision. Works for values far
    /// outside the `f64` exponent range.
    pub fn ln_abs(&self) -> f64 {
        ln_bigint(self.coeff.numer()) - ln_bigint(self.coeff.denom())
            + f64::from(self.pi_half_pow) * 0.5 * std::f64::consts::PI.ln()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let magnitude = self.ln_abs().exp();
        if self.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Correctly rounded decimal expansion with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.decimal_refined(digits)
    }

    /// Prime-factored rendering, e.g. `7⁷·5⁵·3·π⁴/2⁴⁸`.
    pub fn factored(&self) -> String {
        format::factored(self)
    }
}

fn ln_bigint(value: &BigInt) -> f64 {
    let magnitude = value.magnitude();
    let bits = magnitude.bits();
    if bits <= 1000 {
        return magnitude.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (magnitude >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl Mul for &PiRational {
    type Output = PiRational;

    fn mul(self, rhs: &PiRational) -> PiRational {
        PiRational::new(&self.coeff * &rhs.coeff, self.pi_half_pow + rhs.pi_half_pow)
    }
}

impl Mul for PiRational {
    type Output = PiRational;

    fn mul(self, rhs: PiRational) -> PiRational {
        &self * &rhs
    }
}

impl Mul<&BigRational> for &PiRational {
    type Output = PiRational;

    fn mul(self, rhs: &BigRational) -> PiRational {
        self.scale(rhs)
    }
}

/// Compact form: `1/2`, `π/4`, `27π²/1024`, `3√π/4`.
impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let numer = self.coeff.numer();
        let denom = self.coeff.denom();
        let pi = pi_symbol(self.pi_half_pow);
        let head = if pi.is_empty() {
            numer.to_string()
        } else if numer.is_one() {
            pi
        } else if (-numer).is_one() {
            format!("-{pi}")
        } else {
            format!("{numer}{pi}")
        };
        if denom.is_one() {
            write!(f, "{head}")
        } else {
            write!(f, "{head}/{denom}")
        }
    }
}

pub(crate) fn pi_symbol(pi_half_pow: u32) -> String {
    match pi_half_pow {
        0 => String::new(),
        1 => "√π".to_string(),
        2 => "π".to_string(),
        h if h % 2 == 0 => format!("π{}", superscript(u64::from(h / 2))),
        h => format!("π^({h}/2)"),
    }
}

/// A positive half-integer argument, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInteger(u32);

impl HalfInteger {
    /// `x = twice_value / 2`. Zero is rejected since gamma has a pole there.
    pub fn from_twice(twice_value: u32) -> Result<Self, ArithError> {
        if twice_value == 0 {
            return Err(ArithError::GammaPole(0));
        }
        Ok(Self(twice_value))
    }

    pub fn integer(value: u32) -> Result<Self, ArithError> {
        Self::from_twice(2 * value)
    }

    pub fn twice_value(self) -> u32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }

    pub fn succ(self) -> Self {
        Self(self.0 + 2)
    }
}

/// Exact `Γ(x)` for a positive half-integer `x`.
///
/// Integers give `(x-1)!`; half-odd arguments are reached from `Γ(1/2) = √π`
/// through `Γ(x+1) = xΓ(x)`.
pub fn gamma_half(x: HalfInteger) -> PiRational {
    let (mut value, mut arg) = if x.is_integer() {
        (PiRational::one(), HalfInteger(2))
    } else {
        (PiRational::pi_power(1), HalfInteger(1))
    };
    while arg < x {
        value = value.scale(&arg.as_rational());
        arg = arg.succ();
    }
    value
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Barnes `G(n_plus_1) = (n-1)!(n-2)!...1!` with `n = n_plus_1 - 1`.
///
/// `G(1) = G(2) = 1`. An argument of zero is treated as the empty product too.
pub fn barnes_g(n_plus_1: u32) -> BigUint {
    let mut g = BigUint::one();
    let mut fact = BigUint::one();
    for k in 1..n_plus_1.saturating_sub(1) {
        fact *= k;
        g *= &fact;
    }
    g
}

/// `n!!` for `n >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> BigUint {
    assert!(
        n >= -1,
        "double factorial is defined here for n >= -1, got {n}"
    );
    let mut acc = BigUint::one();
    let mut k = n;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(n: i64, d: i64, h: u32) -> PiRational {
        PiRational::from_ratio(n, d, h)
    }

    fn half(twice: u32) -> HalfInteger {
        HalfInteger::from_twice(twice).unwrap()
    }

    #[test]
    fn canonical_form() {
        let a = pr(6, -8, 3);
        assert_eq!(a.coeff(), &BigRational::new((-3).into(), 4.into()));
        assert_eq!(pr(0, 5, 7), PiRational::zero());
        assert_eq!(pr(0, 5, 7).pi_half_pow(), 0);
        assert_ne!(pr(1, 1, 1), pr(1, 1, 2));
    }

    #[test]
    fn mul_div_pow() {
        assert_eq!(&pr(1, 1, 1) * &pr(1, 1, 1), pr(1, 1, 2));
        assert_eq!(pr(3, 4, 1).pow(2), pr(9, 16, 2));
        assert_eq!(
            pr(27, 1024, 4).checked_div(&pr(1, 4, 2)).unwrap(),
            pr(27, 256, 2)
        );
        assert_eq!(pr(5, 7, 3).pow(0), PiRational::one());
    }

    #[test]
    fn div_errors() {
        assert_eq!(
            pr(1, 2, 0).checked_div(&PiRational::zero()),
            Err(ArithError::DivisionByZero)
        );
        assert_eq!(
            pr(1, 2, 1).checked_div(&pr(1, 1, 2)),
            Err(ArithError::NegativePiPower(-1))
        );
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_half(half(1)), pr(1, 1, 1));
        assert_eq!(gamma_half(half(2)), PiRational::one());
        assert_eq!(gamma_half(half(5)), pr(3, 4, 1));
        assert_eq!(gamma_half(half(12)), PiRational::from_integer(120));
        assert!(HalfInteger::from_twice(0).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        for twice in 1..=200u32 {
            let x = half(twice);
            let lhs = gamma_half(x.succ());
            let rhs = gamma_half(x).scale(&x.as_rational());
            assert_eq!(lhs, rhs, "x = {twice}/2");
        }
    }

    #[test]
    fn gamma_duplication() {
        // Γ(j/2)Γ((j+1)/2) = 2^(1-j) √π (j-1)!
        for j in 1..=100u32 {
            let lhs = &gamma_half(half(j)) * &gamma_half(half(j + 1));
            let rhs = PiRational::new(
                BigRational::new(
                    BigInt::from(factorial(j - 1)),
                    BigInt::from(BigUint::one() << (j - 1)),
                ),
                1,
            );
            assert_eq!(lhs, rhs, "j = {j}");
        }
    }

    #[test]
    fn barnes_values() {
        assert_eq!(barnes_g(1), BigUint::one());
        assert_eq!(barnes_g(2), BigUint::one());
        assert_eq!(barnes_g(4), BigUint::from(2u32));
        assert_eq!(barnes_g(5), BigUint::from(12u32));
        for n in 2..=60u32 {
            assert_eq!(barnes_g(n + 1), barnes_g(n) * factorial(n - 1), "n = {n}");
        }
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1), BigUint::one());
        assert_eq!(double_factorial(0), BigUint::one());
        assert_eq!(double_factorial(1), BigUint::one());
        assert_eq!(double_factorial(5), BigUint::from(15u32));
        assert_eq!(double_factorial(6), BigUint::from(48u32));
    }

    #[test]
    fn display_forms() {
        assert_eq!(pr(1, 2, 0).to_string(), "1/2");
        assert_eq!(pr(1, 4, 2).to_string(), "π/4");
        assert_eq!(pr(27, 1024, 4).to_string(), "27π²/1024");
        assert_eq!(pr(3, 4, 1).to_string(), "3√π/4");
        assert_eq!(PiRational::one().to_string(), "1");
    }

    #[test]
    fn ln_abs_large() {
        let big = PiRational::from_ratio(BigInt::one(), BigInt::one() << 3000u32, 0);
        let expected = -3000.0 * std::f64::consts::LN_2;
        assert!((big.ln_abs() - expected).abs() < 1e-9);
        assert!((pr(1, 4, 2).to_f64() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }
}
