//! Exact planar similitudes: multiplicative scale values over prime
//! exponents, rational orthogonal matrices, and the composition algebra.
//!
//! Scales live in the multiplicative ℚ-vector space spanned by primes
//! (`value = Π p^{e_p}` with rational exponents), which makes the
//! "log λ / log n ∈ ℚ" commensurability test a finite exact check on
//! exponent vectors. Orthogonal parts are rational unit vectors (a, b)
//! with a² + b² = 1, i.e. points coming from Pythagorean triples, plus the
//! eight axis-aligned dihedral elements.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bigfloat::BigFloat;
use crate::error::{CarpetError, Result};
use crate::ratio::{format_rational, parse_rational, rat_int};

pub type Point = (BigRational, BigRational);

// ---------------------------------------------------------------------------
// prime factorization of small integers
// ---------------------------------------------------------------------------

/// Deterministic Miller–Rabin, exact for all u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor a positive integer into primes. Inputs come from user-supplied
/// scales and bases, so they are expected to be modest; a trial-division
/// bound plus a primality check on the remainder keeps this exact, and
/// anything genuinely unfactorable here is rejected rather than guessed.
fn factor_positive(n: &BigInt) -> Result<BTreeMap<u64, i64>> {
    if !n.is_positive() {
        return Err(CarpetError::Domain("factorization needs a positive integer".into()));
    }
    let mut rest = n
        .to_u128()
        .ok_or_else(|| CarpetError::Domain(format!("{n} is too large to factor")))?;
    let mut out = BTreeMap::new();
    let push = |p: u64, k: i64, out: &mut BTreeMap<u64, i64>| {
        *out.entry(p).or_insert(0) += k;
    };
    for p in 2u64.. {
        if p > 1_000_000 || (p as u128) * (p as u128) > rest {
            break;
        }
        while rest % p as u128 == 0 {
            rest /= p as u128;
            push(p, 1, &mut out);
        }
    }
    if rest > 1 {
        let r = u64::try_from(rest)
            .ok()
            .filter(|&r| is_prime_u64(r))
            .ok_or_else(|| CarpetError::Domain(format!("cannot factor remainder {rest}")))?;
        push(r, 1, &mut out);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// ScaleValue
// ---------------------------------------------------------------------------

/// A positive real number stored as a finitely supported map prime → rational
/// exponent. Rational numbers are exactly the values whose exponents are all
/// integers; `2^{1/3}` and friends are representable symbolically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleValue {
    exponents: BTreeMap<u64, BigRational>,
}

impl ScaleValue {
    pub fn one() -> Self {
        ScaleValue { exponents: BTreeMap::new() }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn from_rational(r: &BigRational) -> Result<Self> {
        if !r.is_positive() {
            return Err(CarpetError::Domain(format!(
                "scale must be positive, got {}",
                format_rational(r)
            )));
        }
        let mut exponents: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (p, k) in factor_positive(r.numer())? {
            exponents.insert(p, rat_int(k));
        }
        for (p, k) in factor_positive(r.denom())? {
            let e = exponents.entry(p).or_insert_with(BigRational::zero);
            *e -= rat_int(k);
        }
        exponents.retain(|_, e| !e.is_zero());
        Ok(ScaleValue { exponents })
    }

    pub fn from_u64(v: u64) -> Result<Self> {
        Self::from_rational(&BigRational::from(BigInt::from(v)))
    }

    /// Build from explicit (prime, exponent) pairs; repeated primes merge.
    pub fn from_prime_powers(pairs: &[(u64, BigRational)]) -> Result<Self> {
        let mut exponents: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (p, e) in pairs {
            if !is_prime_u64(*p) {
                return Err(CarpetError::Domain(format!("{p} is not prime")));
            }
            let slot = exponents.entry(*p).or_insert_with(BigRational::zero);
            *slot += e;
        }
        exponents.retain(|_, e| !e.is_zero());
        Ok(ScaleValue { exponents })
    }

    pub fn exponents(&self) -> &BTreeMap<u64, BigRational> {
        &self.exponents
    }

    /// The exact rational value, when every exponent is an integer.
    pub fn as_rational(&self) -> Option<BigRational> {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exponents {
            if !e.is_integer() {
                return None;
            }
            let k = e.to_integer();
            let mag = k.magnitude().to_u32()?;
            let pk = BigInt::from(*p).pow(mag);
            if k.is_negative() {
                den *= pk;
            } else {
                num *= pk;
            }
        }
        Some(BigRational::new(num, den))
    }

    pub fn is_rational(&self) -> bool {
        self.exponents.values().all(|e| e.is_integer())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exponents = self.exponents.clone();
        for (p, e) in &other.exponents {
            let slot = exponents.entry(*p).or_insert_with(BigRational::zero);
            *slot += e;
        }
        exponents.retain(|_, e| !e.is_zero());
        ScaleValue { exponents }
    }

    pub fn inv(&self) -> Self {
        ScaleValue { exponents: self.exponents.iter().map(|(p, e)| (*p, -e)).collect() }
    }

    pub fn pow(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return ScaleValue::one();
        }
        ScaleValue { exponents: self.exponents.iter().map(|(p, e)| (*p, e * r)).collect() }
    }

    /// ln of the value at `prec` digits: Σ e_p ln p.
    pub fn ln(&self, prec: u32) -> Result<BigFloat> {
        let mut acc = BigFloat::zero(prec);
        for (p, e) in &self.exponents {
            let lp = crate::bigfloat::ln_u64(*p, prec + 10)?;
            let ef = BigFloat::from_rational(e, prec + 10);
            acc = acc.add(&lp.mul(&ef, prec + 10));
        }
        Ok(acc.with_scale(prec))
    }

    pub fn to_f64(&self) -> f64 {
        self.exponents
            .iter()
            .map(|(p, e)| {
                let ef = e.numer().to_f64().unwrap_or(f64::NAN)
                    / e.denom().to_f64().unwrap_or(f64::NAN);
                (*p as f64).ln() * ef
            })
            .sum::<f64>()
            .exp()
    }
}

impl std::fmt::Display for ScaleValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", format_rational(&r));
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|(p, e)| format!("{p}^{}", format_rational(e)))
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Decide whether `log λ / log base` is rational, and return it when it is.
///
/// λ = base^r holds exactly iff the two exponent vectors are parallel with
/// ratio r, which is a finite comparison of rational coordinates.
pub fn log_commensurable(lambda: &ScaleValue, base: &ScaleValue) -> Result<Option<BigRational>> {
    if base.is_one() {
        return Err(CarpetError::Domain("log base must not be 1".into()));
    }
    if lambda.is_one() {
        return Ok(Some(BigRational::zero()));
    }
    let (p0, e0) = base.exponents.iter().next().expect("non-empty base");
    let r = match lambda.exponents.get(p0) {
        None => return Ok(None),
        Some(el) => el / e0,
    };
    if &base.pow(&r) == lambda {
        Ok(Some(r))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// RationalOrthogonal
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OrthogonalKind {
    Rotation,
    Reflection,
}

/// An orthogonal 2×2 matrix with rational entries, parameterized by a unit
/// vector (a, b): rotation ((a, −b), (b, a)) or reflection ((a, b), (b, −a)).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RationalOrthogonal {
    kind: OrthogonalKind,
    a: BigRational,
    b: BigRational,
}

impl RationalOrthogonal {
    pub fn new(kind: OrthogonalKind, a: BigRational, b: BigRational) -> Result<Self> {
        if &a * &a + &b * &b != BigRational::one() {
            return Err(CarpetError::Validation(format!(
                "({}, {}) is not a rational unit vector",
                format_rational(&a),
                format_rational(&b)
            )));
        }
        Ok(RationalOrthogonal { kind, a, b })
    }

    pub fn rotation(a: BigRational, b: BigRational) -> Result<Self> {
        Self::new(OrthogonalKind::Rotation, a, b)
    }

    pub fn reflection(a: BigRational, b: BigRational) -> Result<Self> {
        Self::new(OrthogonalKind::Reflection, a, b)
    }

    pub fn identity() -> Self {
        RationalOrthogonal {
            kind: OrthogonalKind::Rotation,
            a: BigRational::one(),
            b: BigRational::zero(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.kind == OrthogonalKind::Rotation && self.a.is_one() && self.b.is_zero()
    }

    pub fn kind(&self) -> OrthogonalKind {
        self.kind
    }

    pub fn unit_pair(&self) -> (&BigRational, &BigRational) {
        (&self.a, &self.b)
    }

    /// Matrix rows (((r00, r01), (r10, r11))).
    pub fn matrix(&self) -> ((BigRational, BigRational), (BigRational, BigRational)) {
        match self.kind {
            OrthogonalKind::Rotation => {
                ((self.a.clone(), -self.b.clone()), (self.b.clone(), self.a.clone()))
            }
            OrthogonalKind::Reflection => {
                ((self.a.clone(), self.b.clone()), (self.b.clone(), -self.a.clone()))
            }
        }
    }

    pub fn apply(&self, v: &Point) -> Point {
        let ((r00, r01), (r10, r11)) = self.matrix();
        (&r00 * &v.0 + &r01 * &v.1, &r10 * &v.0 + &r11 * &v.1)
    }

    pub fn compose(&self, other: &Self) -> Self {
        // Complex-number bookkeeping: rotations are multiplication by
        // z = a + bi, reflections conjugate first. All four kind pairings
        // reduce to one multiplication with an optional conjugation.
        let (za, zb) = (&self.a, &self.b);
        let (wa, wb) = match self.kind {
            OrthogonalKind::Rotation => (other.a.clone(), other.b.clone()),
            OrthogonalKind::Reflection => (other.a.clone(), -other.b.clone()),
        };
        let a = za * &wa - zb * &wb;
        let b = za * &wb + zb * &wa;
        let kind = if self.kind == other.kind {
            OrthogonalKind::Rotation
        } else {
            OrthogonalKind::Reflection
        };
        RationalOrthogonal { kind, a, b }
    }

    pub fn inverse(&self) -> Self {
        match self.kind {
            OrthogonalKind::Rotation => RationalOrthogonal {
                kind: OrthogonalKind::Rotation,
                a: self.a.clone(),
                b: -self.b.clone(),
            },
            OrthogonalKind::Reflection => self.clone(),
        }
    }

    /// Entries all in {0, ±1}: the dihedral group of the coordinate axes.
    pub fn is_axis_aligned(&self) -> bool {
        self.a.is_zero() || self.b.is_zero()
    }

    /// Axis-aligned elements with a = 0 exchange the two axes.
    pub fn swaps_axes(&self) -> bool {
        self.a.is_zero()
    }

    /// Both components of O·e₁ nonzero: the x-axis maps to an oblique line.
    pub fn is_oblique(&self) -> bool {
        !self.a.is_zero() && !self.b.is_zero()
    }

    /// The 8 axis-aligned elements: 4 rotations then 4 reflections.
    pub fn dihedral() -> Vec<Self> {
        let one = BigRational::one;
        let zero = BigRational::zero;
        let pairs =
            [(one(), zero()), (-one(), zero()), (zero(), one()), (zero(), -one())];
        let mut out = Vec::with_capacity(8);
        for kind in [OrthogonalKind::Rotation, OrthogonalKind::Reflection] {
            for (a, b) in pairs.clone() {
                out.push(RationalOrthogonal { kind, a, b });
            }
        }
        out
    }
}

impl std::fmt::Display for RationalOrthogonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.kind {
            OrthogonalKind::Rotation => "rot",
            OrthogonalKind::Reflection => "refl",
        };
        write!(f, "{tag}={},{}", format_rational(&self.a), format_rational(&self.b))
    }
}

/// Primitive Pythagorean triples (p, q, h) with h ≤ max, p odd leg.
fn primitive_triples(max_h: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    let mut u = 2u64;
    while u * u < max_h {
        for v in 1..u {
            if (u - v) % 2 == 1 && num_integer::gcd(u, v) == 1 {
                let h = u * u + v * v;
                if h <= max_h {
                    out.push((u * u - v * v, 2 * u * v, h));
                }
            }
        }
        u += 1;
    }
    out
}

/// All rational orthogonal matrices whose unit vector has denominator (in
/// lowest terms) at most `max_hypotenuse`, in a deterministic order:
/// ascending hypotenuse, rotations before reflections, then (a, b).
pub fn enumerate_rational_orthogonals(max_hypotenuse: u64) -> Result<Vec<RationalOrthogonal>> {
    if max_hypotenuse < 1 {
        return Err(CarpetError::Domain("maxHypotenuse must be at least 1".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut all: Vec<(u64, RationalOrthogonal)> = Vec::new();
    for o in RationalOrthogonal::dihedral() {
        if seen.insert((o.kind, o.a.clone(), o.b.clone())) {
            all.push((1, o));
        }
    }
    for (p, q, h) in primitive_triples(max_hypotenuse) {
        let hr = rat_int(h as i64);
        let fracs = |x: u64| {
            let f = rat_int(x as i64) / &hr;
            [f.clone(), -f]
        };
        for kind in [OrthogonalKind::Rotation, OrthogonalKind::Reflection] {
            for (x, y) in [(p, q), (q, p)] {
                for a in fracs(x) {
                    for b in fracs(y) {
                        let o = RationalOrthogonal { kind, a: a.clone(), b: b.clone() };
                        if seen.insert((o.kind, o.a.clone(), o.b.clone())) {
                            all.push((h, o));
                        }
                    }
                }
            }
        }
    }
    all.sort_by(|(h1, o1), (h2, o2)| {
        h1.cmp(h2)
            .then(o1.kind.cmp(&o2.kind))
            .then(o1.a.cmp(&o2.a))
            .then(o1.b.cmp(&o2.b))
    });
    Ok(all.into_iter().map(|(_, o)| o).collect())
}

// ---------------------------------------------------------------------------
// RationalSimilitude
// ---------------------------------------------------------------------------

/// A map v ↦ λ·O·v + t, with λ a `ScaleValue`, O rational orthogonal and t a
/// rational translation. The optional `diagonal` field is the escape hatch
/// for the non-similitude cylinder maps of n > m carpets: when present the
/// linear part is diag(sx, sy)·O with axis-aligned O, and `scale` is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSimilitude {
    scale: ScaleValue,
    orthogonal: RationalOrthogonal,
    translation: Point,
    diagonal: Option<(BigRational, BigRational)>,
}

impl RationalSimilitude {
    pub fn new(scale: ScaleValue, orthogonal: RationalOrthogonal, translation: Point) -> Self {
        RationalSimilitude { scale, orthogonal, translation, diagonal: None }
    }

    pub fn identity() -> Self {
        RationalSimilitude::new(
            ScaleValue::one(),
            RationalOrthogonal::identity(),
            (BigRational::zero(), BigRational::zero()),
        )
    }

    /// Flagged diagonal-affine map diag(sx, sy)·O + t with sx, sy > 0 and
    /// axis-aligned O.
    pub fn diagonal_affine(
        sx: BigRational,
        sy: BigRational,
        orthogonal: RationalOrthogonal,
        translation: Point,
    ) -> Result<Self> {
        if !sx.is_positive() || !sy.is_positive() {
            return Err(CarpetError::Domain("diagonal scales must be positive".into()));
        }
        if !orthogonal.is_axis_aligned() {
            return Err(CarpetError::UnsupportedComposition(
                "diagonal-affine maps require an axis-aligned orthogonal part".into(),
            ));
        }
        let scale = ScaleValue::from_rational(&sx)?;
        Ok(RationalSimilitude { scale, orthogonal, translation, diagonal: Some((sx, sy)) })
    }

    pub fn scale(&self) -> &ScaleValue {
        &self.scale
    }

    pub fn orthogonal(&self) -> &RationalOrthogonal {
        &self.orthogonal
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    pub fn is_diagonal_affine(&self) -> bool {
        self.diagonal.is_some()
    }

    pub fn diagonal_scales(&self) -> Option<&(BigRational, BigRational)> {
        self.diagonal.as_ref()
    }

    /// Per-axis linear scales as rationals, when they exist.
    fn diag_pair(&self) -> Result<(BigRational, BigRational)> {
        match &self.diagonal {
            Some((sx, sy)) => Ok((sx.clone(), sy.clone())),
            None => {
                let l = self.scale.as_rational().ok_or_else(|| {
                    CarpetError::UnsupportedComposition(format!(
                        "scale {} is irrational; exact point arithmetic is impossible",
                        self.scale
                    ))
                })?;
                Ok((l.clone(), l))
            }
        }
    }

    /// Image of an exact rational point. Requires a rational scale.
    pub fn apply(&self, v: &Point) -> Result<Point> {
        let (sx, sy) = self.diag_pair()?;
        let (ox, oy) = self.orthogonal.apply(v);
        Ok((sx * ox + &self.translation.0, sy * oy + &self.translation.1))
    }

    /// f ∘ g: apply g first.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if self.diagonal.is_none() && g.diagonal.is_none() {
            // Genuine similitudes compose symbolically; the translation
            // needs the outer scale as a rational unless g translates by 0.
            let scale = self.scale.mul(&g.scale);
            let orthogonal = self.orthogonal.compose(&g.orthogonal);
            let translation = if g.translation.0.is_zero() && g.translation.1.is_zero() {
                self.translation.clone()
            } else {
                let l = self.scale.as_rational().ok_or_else(|| {
                    CarpetError::UnsupportedComposition(
                        "irrational scale against a nonzero translation".into(),
                    )
                })?;
                let (ox, oy) = self.orthogonal.apply(&g.translation);
                (&l * ox + &self.translation.0, l * oy + &self.translation.1)
            };
            return Ok(RationalSimilitude { scale, orthogonal, translation, diagonal: None });
        }
        // At least one diagonal-affine factor: both orthogonal parts must be
        // axis-aligned for diag·O·diag·O to stay diagonal-times-orthogonal.
        if !self.orthogonal.is_axis_aligned() || !g.orthogonal.is_axis_aligned() {
            return Err(CarpetError::UnsupportedComposition(
                "diagonal-affine composition needs axis-aligned orthogonal parts".into(),
            ));
        }
        let (fx, fy) = self.diag_pair()?;
        let (gx, gy) = g.diag_pair()?;
        let (gx, gy) = if self.orthogonal.swaps_axes() { (gy, gx) } else { (gx, gy) };
        let sx = &fx * gx;
        let sy = &fy * gy;
        let (ox, oy) = self.orthogonal.apply(&g.translation);
        let translation = (fx * ox + &self.translation.0, fy * oy + &self.translation.1);
        let orthogonal = self.orthogonal.compose(&g.orthogonal);
        if sx == sy {
            let scale = ScaleValue::from_rational(&sx)?;
            Ok(RationalSimilitude { scale, orthogonal, translation, diagonal: None })
        } else {
            RationalSimilitude::diagonal_affine(sx, sy, orthogonal, translation)
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let oinv = self.orthogonal.inverse();
        match &self.diagonal {
            None => {
                let scale = self.scale.inv();
                let translation = if self.translation.0.is_zero() && self.translation.1.is_zero()
                {
                    (BigRational::zero(), BigRational::zero())
                } else {
                    let l = self.scale.as_rational().ok_or_else(|| {
                        CarpetError::UnsupportedComposition(
                            "irrational scale against a nonzero translation".into(),
                        )
                    })?;
                    let (ox, oy) = oinv.apply(&self.translation);
                    (-(ox / &l), -(oy / l))
                };
                Ok(RationalSimilitude { scale, orthogonal: oinv, translation, diagonal: None })
            }
            Some((sx, sy)) => {
                // (D O)^{-1} = O^{-1} D^{-1} = D' O^{-1}, D' permuted by O^{-1}.
                let (ix, iy) = (sx.recip(), sy.recip());
                let (ix, iy) = if oinv.swaps_axes() { (iy, ix) } else { (ix, iy) };
                let (ox, oy) = oinv.apply(&self.translation);
                let translation = (-(&ix * ox), -(&iy * oy));
                RationalSimilitude::diagonal_affine(ix, iy, oinv, translation)
            }
        }
    }

    /// True iff the image of the x-axis is parallel to neither axis.
    pub fn is_oblique(&self) -> Result<bool> {
        if self.diagonal.is_some() {
            return Err(CarpetError::Domain(
                "obliqueness is defined only for genuine similitudes".into(),
            ));
        }
        Ok(self.orthogonal.is_oblique())
    }
}

impl std::fmt::Display for RationalSimilitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some((sx, sy)) = &self.diagonal {
            write!(
                f,
                "diag={},{} {} t={},{}",
                format_rational(sx),
                format_rational(sy),
                self.orthogonal,
                format_rational(&self.translation.0),
                format_rational(&self.translation.1)
            )
        } else {
            write!(
                f,
                "scale={} {} t={},{}",
                self.scale,
                self.orthogonal,
                format_rational(&self.translation.0),
                format_rational(&self.translation.1)
            )
        }
    }
}

/// Parse the CLI similitude literal: whitespace-separated `scale=…`,
/// `rot=a,b` or `refl=a,b`, `t=x,y`. Omitted parts default to the identity.
/// Scales are either a rational (`1/6`) or a prime-power product
/// (`2^-3*5^1/2`).
pub fn parse_similitude(text: &str) -> Result<RationalSimilitude> {
    let mut scale = ScaleValue::one();
    let mut orthogonal = RationalOrthogonal::identity();
    let mut translation = (BigRational::zero(), BigRational::zero());
    let perr = |msg: String| CarpetError::Parse { line: 0, msg };
    for token in text.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| perr(format!("expected key=value, got `{token}`")))?;
        match key {
            "scale" => scale = parse_scale(value)?,
            "rot" | "refl" => {
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| perr(format!("expected `{key}=a,b`, got `{value}`")))?;
                let kind = if key == "rot" {
                    OrthogonalKind::Rotation
                } else {
                    OrthogonalKind::Reflection
                };
                orthogonal =
                    RationalOrthogonal::new(kind, parse_rational(a)?, parse_rational(b)?)?;
            }
            "t" => {
                let (x, y) = value
                    .split_once(',')
                    .ok_or_else(|| perr(format!("expected `t=x,y`, got `{value}`")))?;
                translation = (parse_rational(x)?, parse_rational(y)?);
            }
            other => return Err(perr(format!("unknown similitude field `{other}`"))),
        }
    }
    Ok(RationalSimilitude::new(scale, orthogonal, translation))
}

/// Parse `1/6` or `2^-3*5^1/2` into a ScaleValue.
pub fn parse_scale(text: &str) -> Result<ScaleValue> {
    if !text.contains('^') {
        return ScaleValue::from_rational(&parse_rational(text)?);
    }
    let mut pairs = Vec::new();
    for factor in text.split('*') {
        let (p, e) = factor.split_once('^').ok_or_else(|| CarpetError::Parse {
            line: 0,
            msg: format!("expected p^e in scale factor `{factor}`"),
        })?;
        let prime: u64 = p.trim().parse().map_err(|_| CarpetError::Parse {
            line: 0,
            msg: format!("bad prime `{p}` in scale"),
        })?;
        pairs.push((prime, parse_rational(e)?));
    }
    ScaleValue::from_prime_powers(&pairs)
}
