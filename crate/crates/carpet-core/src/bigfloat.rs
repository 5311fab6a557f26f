//! Fixed-point decimal arithmetic with logarithms and exponentials.
//!
//! Values are `mantissa * 10^-scale` with a `BigInt` mantissa, so every
//! operation is deterministic and the precision is an explicit parameter
//! (digits after the decimal point). Dimension formulas need ~50 significant
//! digits with two independent evaluation routes agreeing to 1e-30, which
//! rules out hardware floats; a scaled-integer representation with
//! round-to-nearest keeps full control of the error budget.
//!
//! `ln` uses the atanh series after power-of-two argument reduction,
//! `exp` a Taylor series after repeated halving. Both run at `prec + GUARD`
//! internal digits and round once at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CarpetError, Result};

/// Extra internal digits carried by `ln`/`exp`/`div` to absorb rounding.
const GUARD: u32 = 20;

/// A non-negative-scale fixed-point decimal: `value = mantissa / 10^scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigFloat {
    mantissa: BigInt,
    scale: u32,
}

fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

/// Integer division rounded to nearest, ties away from zero. `den > 0`.
fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let two = BigInt::from(2);
    let adj = if num.is_negative() { -den } else { den.clone() };
    (num * &two + adj) / (den * &two)
}

impl BigFloat {
    pub fn zero(scale: u32) -> Self {
        BigFloat { mantissa: BigInt::zero(), scale }
    }

    pub fn from_u64(v: u64, scale: u32) -> Self {
        BigFloat { mantissa: BigInt::from(v) * pow10(scale), scale }
    }

    pub fn from_rational(r: &BigRational, scale: u32) -> Self {
        let num = r.numer() * pow10(scale);
        BigFloat { mantissa: div_round(&num, r.denom()), scale }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    /// Re-round to a new scale (exact when the scale grows).
    pub fn with_scale(&self, scale: u32) -> Self {
        if scale >= self.scale {
            BigFloat { mantissa: &self.mantissa * pow10(scale - self.scale), scale }
        } else {
            BigFloat {
                mantissa: div_round(&self.mantissa, &pow10(self.scale - scale)),
                scale,
            }
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mantissa: -&self.mantissa, scale: self.scale }
    }

    pub fn add(&self, other: &Self) -> Self {
        let s = self.scale.max(other.scale);
        let a = self.with_scale(s);
        let b = other.with_scale(s);
        BigFloat { mantissa: a.mantissa + b.mantissa, scale: s }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product rounded to `scale` digits.
    pub fn mul(&self, other: &Self, scale: u32) -> Self {
        let prod = &self.mantissa * &other.mantissa;
        let shift = self.scale + other.scale;
        if shift >= scale {
            BigFloat { mantissa: div_round(&prod, &pow10(shift - scale)), scale }
        } else {
            BigFloat { mantissa: prod * pow10(scale - shift), scale }
        }
    }

    /// Quotient rounded to `scale` digits.
    pub fn div(&self, other: &Self, scale: u32) -> Result<Self> {
        if other.is_zero() {
            return Err(CarpetError::Domain("division by zero".into()));
        }
        let a = self.with_scale(scale + GUARD);
        let b = other.with_scale(scale + GUARD);
        let num = a.mantissa * pow10(scale + GUARD);
        let mantissa = div_round(&num, &b.mantissa);
        BigFloat { mantissa, scale: scale + GUARD }.with_scale(scale).pipe_ok()
    }

    fn pipe_ok(self) -> Result<Self> {
        Ok(self)
    }

    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        let s = self.scale.max(other.scale);
        self.with_scale(s).mantissa.cmp(&other.with_scale(s).mantissa)
    }

    pub fn abs_diff(&self, other: &Self) -> Self {
        let d = self.sub(other);
        BigFloat { mantissa: d.mantissa.abs(), scale: d.scale }
    }

    /// True when `|self - other| <= 10^-tol_digits`.
    pub fn agrees_to(&self, other: &Self, tol_digits: u32) -> bool {
        let d = self.abs_diff(other);
        let tol = BigFloat { mantissa: pow10(d.scale.saturating_sub(tol_digits)), scale: d.scale };
        d.cmp_value(&tol) != std::cmp::Ordering::Greater
    }

    /// Natural logarithm of a positive value, rounded to `prec` digits.
    pub fn ln(&self, prec: u32) -> Result<Self> {
        if !self.is_positive() {
            return Err(CarpetError::Domain("ln of a non-positive value".into()));
        }
        let w = prec + GUARD;
        let mut x = self.with_scale(w);
        // Reduce into [3/4, 3/2) by powers of two so the atanh series
        // argument stays below 1/5 in absolute value.
        let three_halves = BigFloat { mantissa: BigInt::from(15) * pow10(w - 1), scale: w };
        let three_quarters = BigFloat { mantissa: BigInt::from(75) * pow10(w - 2), scale: w };
        let mut k: i64 = 0;
        while x.cmp_value(&three_halves) != std::cmp::Ordering::Less {
            x = BigFloat { mantissa: div_round(&x.mantissa, &BigInt::from(2)), scale: w };
            k += 1;
        }
        while x.cmp_value(&three_quarters) == std::cmp::Ordering::Less {
            x = BigFloat { mantissa: &x.mantissa * BigInt::from(2), scale: w };
            k -= 1;
        }
        // ln x = 2 atanh((x-1)/(x+1)) + k ln 2
        let one = BigFloat::from_u64(1, w);
        let t = x.sub(&one).div(&x.add(&one), w)?;
        let mut acc = atanh_series(&t, w);
        acc = acc.add(&acc.clone());
        if k != 0 {
            let ln2 = ln2(w);
            let kf = BigFloat {
                mantissa: BigInt::from(k) * pow10(w),
                scale: w,
            };
            acc = acc.add(&ln2.mul(&kf, w));
        }
        Ok(acc.with_scale(prec))
    }

    /// Exponential, rounded to `prec` digits. The argument magnitude is
    /// capped (|x| <= 4096) — far beyond anything a dimension formula needs.
    pub fn exp(&self, prec: u32) -> Result<Self> {
        let cap = BigFloat::from_u64(4096, self.scale);
        if self.abs_diff(&BigFloat::zero(self.scale)).cmp_value(&cap) == std::cmp::Ordering::Greater
        {
            return Err(CarpetError::Domain("exp argument too large".into()));
        }
        // Halve until |r| <= 1/8, run the Taylor series, square back up.
        // Each squaring can double the relative error, so widen the guard.
        let mut j = 0u32;
        let w0 = prec + GUARD;
        let mut r = self.with_scale(w0);
        let eighth = BigFloat { mantissa: pow10(w0) / BigInt::from(8), scale: w0 };
        while r.mantissa.abs() > eighth.mantissa {
            r = BigFloat { mantissa: div_round(&r.mantissa, &BigInt::from(2)), scale: w0 };
            j += 1;
        }
        let w = prec + GUARD + j;
        r = r.with_scale(w);
        let mut term = BigFloat::from_u64(1, w);
        let mut acc = BigFloat::from_u64(1, w);
        let mut i = 1u64;
        while !term.is_zero() {
            term = term.mul(&r, w);
            term = BigFloat { mantissa: div_round(&term.mantissa, &BigInt::from(i)), scale: w };
            acc = acc.add(&term);
            i += 1;
        }
        for _ in 0..j {
            acc = acc.mul(&acc.clone(), w);
        }
        Ok(acc.with_scale(prec))
    }

    /// Decimal string, trimmed of trailing zeros (keeps at least one digit
    /// after the point).
    pub fn to_decimal_string(&self) -> String {
        let neg = self.mantissa.is_negative();
        let digits = self.mantissa.abs().to_string();
        let scale = self.scale as usize;
        let (int_part, frac_part) = if digits.len() > scale {
            let split = digits.len() - scale;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(scale - digits.len()), digits))
        };
        let frac = frac_part.trim_end_matches('0');
        let frac = if frac.is_empty() { "0" } else { frac };
        format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac)
    }

    /// Nearest f64, for report output only.
    pub fn to_f64(&self) -> f64 {
        let s = self.with_scale(18.min(self.scale));
        let m: f64 = s.mantissa.to_string().parse().unwrap_or(f64::NAN);
        m / 10f64.powi(s.scale as i32)
    }
}

impl std::fmt::Display for BigFloat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

/// atanh(t) = t + t^3/3 + t^5/5 + ... for |t| < 1, at scale `w`.
fn atanh_series(t: &BigFloat, w: u32) -> BigFloat {
    let tsq = t.mul(t, w);
    let mut power = t.clone().with_scale(w);
    let mut acc = power.clone();
    let mut k = 3u64;
    loop {
        power = power.mul(&tsq, w);
        if power.is_zero() {
            break;
        }
        let term = BigFloat { mantissa: div_round(&power.mantissa, &BigInt::from(k)), scale: w };
        acc = acc.add(&term);
        k += 2;
    }
    acc
}

/// ln 2 = 2 atanh(1/3) at scale `w`.
fn ln2(w: u32) -> BigFloat {
    let third = BigFloat { mantissa: div_round(&pow10(w), &BigInt::from(3)), scale: w };
    let a = atanh_series(&third, w);
    a.add(&a.clone())
}

/// ln of a positive integer at `prec` digits — convenience for count logs.
pub fn ln_u64(v: u64, prec: u32) -> Result<BigFloat> {
    BigFloat::from_u64(v, prec + GUARD).ln(prec)
}

/// ln of a positive rational at `prec` digits.
pub fn ln_rational(r: &BigRational, prec: u32) -> Result<BigFloat> {
    if !r.is_positive() {
        return Err(CarpetError::Domain("ln of a non-positive rational".into()));
    }
    BigFloat::from_rational(r, prec + GUARD).ln(prec)
}

/// `r` as an exact BigRational helper for 1 (used by callers building sums).
pub fn one_rational() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    // Reference digits computed with an independent arbitrary-precision
    // implementation (mpmath at 70 dps).
    const LN2_50: &str = "0.69314718055994530941723212145817656807550013436026";
    const LN3_50: &str = "1.0986122886681096913952452369225257046474905578227";
    const EXP1_50: &str = "2.7182818284590452353602874713526624977572470937";

    fn assert_prefix(value: &BigFloat, expected: &str) {
        let s = value.to_decimal_string();
        let keep = expected.len().min(s.len()) - 2; // drop last digits to allow final-digit rounding
        assert_eq!(&s[..keep], &expected[..keep], "got {s}, want prefix of {expected}");
    }

    #[test]
    fn ln_matches_reference_digits() {
        let two = BigFloat::from_u64(2, 60);
        assert_prefix(&two.ln(55).unwrap(), LN2_50);
        let three = BigFloat::from_u64(3, 60);
        assert_prefix(&three.ln(55).unwrap(), LN3_50);
    }

    #[test]
    fn exp_matches_reference_digits() {
        let one = BigFloat::from_u64(1, 60);
        assert_prefix(&one.exp(52).unwrap(), EXP1_50);
    }

    #[test]
    fn exp_ln_round_trip_is_tight() {
        for (n, d) in [(7i64, 3i64), (1, 10), (355, 113), (9, 2)] {
            let x = BigFloat::from_rational(&rat(n, d), 70);
            let back = x.ln(64).unwrap().exp(60).unwrap();
            assert!(back.agrees_to(&x.with_scale(60), 55), "round trip {n}/{d}");
        }
    }

    #[test]
    fn ln_rejects_non_positive() {
        assert!(BigFloat::zero(10).ln(10).is_err());
        assert!(BigFloat::from_u64(3, 10).neg().ln(10).is_err());
    }

    #[test]
    fn arithmetic_and_compare() {
        let a = BigFloat::from_rational(&rat(1, 3), 40);
        let b = BigFloat::from_rational(&rat(2, 3), 40);
        let s = a.add(&b);
        assert!(s.agrees_to(&BigFloat::from_u64(1, 40), 39));
        let p = a.mul(&b, 40);
        assert!(p.agrees_to(&BigFloat::from_rational(&rat(2, 9), 40), 39));
        let q = a.div(&b, 40).unwrap();
        assert!(q.agrees_to(&BigFloat::from_rational(&rat(1, 2), 40), 39));
    }

    #[test]
    fn decimal_string_shapes() {
        assert_eq!(BigFloat::from_u64(5, 3).to_decimal_string(), "5.0");
        assert_eq!(BigFloat::from_rational(&rat(-1, 4), 4).to_decimal_string(), "-0.25");
    }
}
