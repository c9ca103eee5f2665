//! Prime-factored rendering of exact values.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::{pi_symbol, PiRational};

/// Trial-division bound; anything left over is printed as a single factor.
const TRIAL_LIMIT: u64 = 10_000;

pub fn superscript(value: u64) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    value
        .to_string()
        .bytes()
        .map(|b| DIGITS[(b - b'0') as usize])
        .collect()
}

/// `(prime, exponent)` pairs in ascending order, plus the unfactored cofactor.
pub fn factor_small_primes(value: &BigUint) -> (Vec<(u64, u32)>, BigUint) {
    let mut rest = value.clone();
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT && BigUint::from(p * p) <= rest {
        let mut exponent = 0;
        loop {
            let (q, r) = rest.div_rem(&BigUint::from(p));
            if r != BigUint::from(0u32) {
                break;
            }
            rest = q;
            exponent += 1;
        }
        if exponent > 0 {
            factors.push((p, exponent));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    // No divisor up to sqrt(rest) means rest itself is prime.
    if !rest.is_one() && BigUint::from(p * p) > rest {
        if let Some(prime) = rest.to_u64() {
            factors.push((prime, 1));
            rest = BigUint::one();
        }
    }
    (factors, rest)
}

fn product_string(value: &BigUint) -> (String, usize) {
    let (factors, rest) = factor_small_primes(value);
    let mut parts: Vec<String> = Vec::new();
    if !rest.is_one() {
        parts.push(rest.to_string());
    }
    for (p, e) in factors.into_iter().rev() {
        if e == 1 {
            parts.push(p.to_string());
        } else {
            parts.push(format!("{p}{}", superscript(u64::from(e))));
        }
    }
    let count = parts.len();
    (parts.join("·"), count)
}

/// Descending primes, pi after the numerator, denominator parenthesised when
/// it has more than one factor: `3²/(5²·2⁵)`, `7⁷·5⁵·3·π⁴/2⁴⁸`.
pub(super) fn factored(x: &PiRational) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let numer = x.coeff().numer().magnitude().clone();
    let denom = x.coeff().denom().magnitude().clone();
    let sign = if x.coeff().is_negative() { "-" } else { "" };

    let pi = pi_symbol(x.pi_half_pow());
    let mut head = if numer.is_one() {
        String::new()
    } else {
        product_string(&numer).0
    };
    if !pi.is_empty() {
        if !head.is_empty() {
            head.push('·');
        }
        head.push_str(&pi);
    }
    if head.is_empty() {
        head.push('1');
    }
    if denom.is_one() {
        return format!("{sign}{head}");
    }
    let (tail, count) = product_string(&denom);
    if count > 1 {
        format!("{sign}{head}/({tail})")
    } else {
        format!("{sign}{head}/{tail}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superscripts() {
        assert_eq!(superscript(0), "⁰");
        assert_eq!(superscript(118), "¹¹⁸");
    }

    #[test]
    fn factors() {
        let (f, rest) = factor_small_primes(&BigUint::from(2u32 * 2 * 3 * 7 * 7));
        assert_eq!(f, vec![(2, 2), (3, 1), (7, 2)]);
        assert!(rest.is_one());
        let (f, rest) = factor_small_primes(&BigUint::from(2u64 * 1_000_003));
        assert_eq!(f, vec![(2, 1), (1_000_003, 1)]);
        assert!(rest.is_one());
        let big = BigUint::from(1_000_003u64) * BigUint::from(1_000_033u64);
        let (f, rest) = factor_small_primes(&(&big * 3u32));
        assert_eq!(f, vec![(3, 1)]);
        assert_eq!(rest, big);
    }

    #[test]
    fn factored_forms() {
        assert_eq!(PiRational::from_ratio(1, 4, 2).factored(), "π/2²");
        assert_eq!(PiRational::from_ratio(1, 2, 0).factored(), "1/2");
        assert_eq!(PiRational::from_ratio(9, 800, 0).factored(), "3²/(5²·2⁵)");
        assert_eq!(PiRational::from_ratio(27, 1024, 4).factored(), "3³·π²/2¹⁰");
        assert_eq!(PiRational::one().factored(), "1");
    }
}
