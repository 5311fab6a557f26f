//! Small helpers for exact rationals used throughout the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{CarpetError, Result};

/// Shorthand constructor; panics on zero denominator (programmer error).
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let err = || CarpetError::Parse { line: 0, msg: format!("bad rational `{text}`") };
    let mut parts = text.splitn(2, '/');
    let num: BigInt = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
    match parts.next() {
        None => Ok(BigRational::from(num)),
        Some(d) => {
            let den: BigInt = d.trim().parse().map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Render as "p/q", or "p" when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// floor(r) as BigInt.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// True when `r` lies in the closed interval [0, 1].
pub fn in_unit_interval(r: &BigRational) -> bool {
    !r.is_negative() && r <= &BigRational::from(BigInt::from(1))
}

/// Parse a plain decimal literal like "1.3496" (optional sign and fraction)
/// into the exact rational it denotes.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let err = || CarpetError::Parse { line: 0, msg: format!("bad decimal `{text}`") };
    let t = text.trim();
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let mut parts = t.splitn(2, '.');
    let int_part = parts.next().ok_or_else(err)?;
    let frac_part = parts.next().unwrap_or("");
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
    let den = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(BigRational::new(num * BigInt::from(sign), den))
}
