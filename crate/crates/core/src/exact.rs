//! Helpers for exact rational arithmetic on bounds.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational with the value of the shortest decimal that round-trips to
/// `x` (so `3.2` becomes `16/5`, not the binary expansion of the double).
pub fn rational_from_f64(x: f64) -> BigRational {
    parse_decimal(&format!("{x}")).expect("finite f64 prints as a decimal")
}

/// Parses `"19.2"`, `"-7"`, `"1e3"`, `"3/4"` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut den = BigInt::one();
    if scale >= 0 {
        num *= num_traits::pow(ten, scale as usize);
    } else {
        den = num_traits::pow(ten, (-scale) as usize);
    }
    if neg {
        num = -num;
    }
    Ok(BigRational::new(num, den))
}

/// Smallest integer strictly greater than `x`.
pub fn floor_plus_one(x: &BigRational) -> BigInt {
    x.floor().to_integer() + 1
}

/// Smallest bit length `b` such that some integer of `b` bits exceeds `x`,
/// i.e. the bit length of `floor(x) + 1`.
pub fn min_bits_exceeding(x: &BigRational) -> u64 {
    let v = floor_plus_one(x);
    if v.sign() != Sign::Plus {
        return 1;
    }
    v.bits()
}

pub fn ceil_to_biguint(x: &BigRational) -> BigUint {
    let c = x.ceil().to_integer();
    c.to_biguint().unwrap_or_default()
}

pub fn rational(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn pow2(bits: u64) -> BigUint {
    BigUint::one() << bits
}

pub fn pow2_rational(bits: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(pow2(bits)))
}

/// `log2` of a positive big integer, accurate to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits f64").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("fits f64");
    top.log2() + shift as f64
}

/// `log2` of a positive rational.
pub fn log2_rational(x: &BigRational) -> f64 {
    if !x.is_positive() {
        return f64::NEG_INFINITY;
    }
    let num = x.numer().to_biguint().expect("positive");
    let den = x.denom().to_biguint().expect("positive");
    log2_biguint(&num) - log2_biguint(&den)
}

/// `ceil(log2 x)` for a positive rational, exact.
pub fn ceil_log2(x: &BigRational) -> u64 {
    assert!(x.is_positive(), "log of non-positive value");
    if x <= &rational(1) {
        return 0;
    }
    // smallest k with 2^k >= x
    let c = ceil_to_biguint(x);
    let mut k = c.bits() - 1;
    if pow2(k) < c || pow2_rational(k) < *x {
        k += 1;
    }
    k
}

/// Renders a rational as `num/den` (or a plain integer).
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with `digits` fractional digits, rounded toward zero.
pub fn format_decimal(x: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = (x * BigRational::from_integer(scale.clone())).trunc().to_integer();
    let (q, r) = scaled.abs().div_rem(&scale);
    let sign = if x.is_negative() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{q}")
    } else {
        format!("{sign}{q}.{:0>width$}", r.to_string(), width = digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("19.2").unwrap(), BigRational::new(96.into(), 5.into()));
        assert_eq!(parse_decimal("-0.5").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_decimal("1e3").unwrap(), rational(1000));
        assert_eq!(parse_decimal("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(rational_from_f64(3.2), BigRational::new(16.into(), 5.into()));
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1/0").is_err());
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(min_bits_exceeding(&rational(8)), 4);
        assert_eq!(min_bits_exceeding(&parse_decimal("241716428.8").unwrap()), 28);
        assert_eq!(ceil_log2(&rational(1)), 0);
        assert_eq!(ceil_log2(&rational(8)), 3);
        assert_eq!(ceil_log2(&parse_decimal("8.0001").unwrap()), 4);
        assert_eq!(ceil_log2(&parse_decimal("0.3").unwrap()), 0);
        assert!((log2_rational(&rational(1024)) - 10.0).abs() < 1e-12);
        assert_eq!(format_decimal(&parse_decimal("39321.6").unwrap(), 1), "39321.6");
        assert_eq!(format_rational(&parse_decimal("39321.6").unwrap()), "196608/5");
    }
}
