//! Canonical fraction strings: `"N"` for integers, `"N/M"` otherwise, always reduced.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Result, RubanError};

pub fn format_fraction(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RubanError::InvalidInput(format!("not an integer: {s:?}")));
    }
    t.parse::<BigInt>()
        .map_err(|_| RubanError::InvalidInput(format!("not an integer: {s:?}")))
}

fn parse_denominator(s: &str) -> Result<BigInt> {
    match s.split_once('^') {
        Some((base, exp)) => {
            let base = parse_int(base)?;
            let exp: u32 = exp
                .trim()
                .parse()
                .map_err(|_| RubanError::InvalidInput(format!("bad exponent in {s:?}")))?;
            Ok(num_traits::pow(base, exp as usize))
        }
        None => parse_int(s),
    }
}

/// Parses `"N"`, `"N/M"` or `"N/b^j"`; the result is reduced.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_denominator(d)?;
            if d.is_zero() {
                return Err(RubanError::InvalidInput(format!("zero denominator in {s:?}")));
            }
            if d.is_negative() {
                return Ok(BigRational::new(-n, -d));
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}
