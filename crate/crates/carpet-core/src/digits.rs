//! Deleted-digit sets, base-b expansions of rationals, horizontal slices and
//! their finite-level structure: approximations, gaps, one-sided isolated
//! points, and slice dimension values.
//!
//! Everything here is exact. Interval endpoints are integers over a power of
//! the base, digit sequences are eventually periodic words, and dimension
//! values are ratios of logarithms of integers kept in symbolic form.

use std::collections::BTreeSet;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CarpetError, Result};
use crate::pattern::CarpetPattern;
use crate::ratio::{format_rational, in_unit_interval};

/// Default cap on enumerated intervals/endpoints, mirroring the cell budget.
pub const DEFAULT_INTERVAL_BUDGET: usize = 1 << 24;

fn pow_u128(base: u32, exp: u32) -> Result<u128> {
    (base as u128).checked_pow(exp).ok_or_else(|| {
        CarpetError::Resource(format!("{base}^{exp} overflows the endpoint representation"))
    })
}

// ---------------------------------------------------------------------------
// EventuallyPeriodicDigits
// ---------------------------------------------------------------------------

/// An eventually periodic digit sequence d_1 d_2 d_3 … in a fixed base,
/// stored as preperiod + repeating period, always in canonical form: the
/// period is primitive and the preperiod is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicDigits {
    base: u32,
    preperiod: Vec<u32>,
    period: Vec<u32>,
}

impl EventuallyPeriodicDigits {
    pub fn new(base: u32, preperiod: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(CarpetError::Domain("digit base must be at least 2".into()));
        }
        if period.is_empty() {
            return Err(CarpetError::Domain("period must be non-empty".into()));
        }
        if preperiod.iter().chain(&period).any(|&d| d >= base) {
            return Err(CarpetError::Domain(format!("digit out of range for base {base}")));
        }
        let mut s = EventuallyPeriodicDigits { base, preperiod, period };
        s.canonicalize();
        Ok(s)
    }

    /// Purely periodic sequence.
    pub fn periodic(base: u32, period: Vec<u32>) -> Result<Self> {
        Self::new(base, Vec::new(), period)
    }

    fn canonicalize(&mut self) {
        // Shrink the period to its primitive root.
        let len = self.period.len();
        for d in 1..=len {
            if len.is_multiple_of(d) && self.period.chunks(d).all(|c| c == &self.period[..d]) {
                self.period.truncate(d);
                break;
            }
        }
        // Absorb preperiod digits that merely repeat the period's tail.
        while let Some(&last) = self.preperiod.last() {
            if last == *self.period.last().expect("non-empty period") {
                self.preperiod.pop();
                let tail = self.period.pop().expect("non-empty period");
                self.period.insert(0, tail);
            } else {
                break;
            }
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn preperiod(&self) -> &[u32] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    /// Digit at 1-indexed position k.
    pub fn digit(&self, k: u64) -> u32 {
        let k = k as usize;
        debug_assert!(k >= 1);
        if k <= self.preperiod.len() {
            self.preperiod[k - 1]
        } else {
            self.period[(k - 1 - self.preperiod.len()) % self.period.len()]
        }
    }

    /// The exact value Σ d_k base^{-k}.
    pub fn value(&self) -> BigRational {
        let b = BigInt::from(self.base);
        let mut pre_num = BigInt::zero();
        for &d in &self.preperiod {
            pre_num = pre_num * &b + BigInt::from(d);
        }
        let mut per_num = BigInt::zero();
        for &d in &self.period {
            per_num = per_num * &b + BigInt::from(d);
        }
        let bp = b.pow(self.preperiod.len() as u32);
        let bq = b.pow(self.period.len() as u32);
        // value = pre/b^p + per / (b^p (b^q - 1))
        let denom = &bp * (&bq - BigInt::one());
        BigRational::new(pre_num * (&bq - BigInt::one()) + per_num, denom)
    }

    /// True when every digit of the sequence lies in `allowed`.
    pub fn digits_within(&self, allowed: &BTreeSet<u32>) -> bool {
        self.preperiod.iter().chain(&self.period).all(|d| allowed.contains(d))
    }

    /// All base-`base` expansions of a rational in [0, 1]: one for most
    /// values, two when the value is a base-adic rational strictly inside
    /// the interval (terminating form and the low form ending in base−1).
    pub fn expansions_of(x: &BigRational, base: u32) -> Result<Vec<Self>> {
        if base < 2 {
            return Err(CarpetError::Domain("digit base must be at least 2".into()));
        }
        if !in_unit_interval(x) {
            return Err(CarpetError::Domain(format!(
                "{} is outside [0, 1]",
                format_rational(x)
            )));
        }
        if x.is_zero() {
            return Ok(vec![Self::periodic(base, vec![0])?]);
        }
        if x.is_one() {
            return Ok(vec![Self::periodic(base, vec![base - 1])?]);
        }
        // Determine whether the denominator divides a power of the base.
        let bb = BigInt::from(base);
        let mut rest = x.denom().clone();
        let mut adic_exp = 0u32;
        loop {
            let g = rest.gcd(&bb);
            if g.is_one() {
                break;
            }
            rest /= g;
            adic_exp += 1;
        }
        if rest.is_one() {
            // Two expansions: digits(a) then 0^∞, digits(a−1) then (b−1)^∞,
            // where a = x·base^{adic_exp}.
            let a = (x * BigRational::from(bb.clone()).pow(adic_exp as i32)).to_integer();
            let digits_of = |v: &BigInt| -> Vec<u32> {
                let mut out = vec![0u32; adic_exp as usize];
                let mut v = v.clone();
                for slot in out.iter_mut().rev() {
                    let (q, r) = v.div_rem(&bb);
                    *slot = r.to_u32().expect("digit < base");
                    v = q;
                }
                out
            };
            let hi = Self::new(base, digits_of(&a), vec![0])?;
            let lo = Self::new(base, digits_of(&(&a - BigInt::one())), vec![base - 1])?;
            return Ok(vec![hi, lo]);
        }
        // Long division with remainder-cycle detection gives the unique
        // expansion; remainders determine all future digits, so the first
        // repeat yields both the minimal preperiod and the primitive period.
        let den = x.denom().clone();
        let mut rem = x.numer().clone();
        let mut digits: Vec<u32> = Vec::new();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        seen.insert(rem.clone(), 0);
        loop {
            if digits.len() > (1 << 20) {
                return Err(CarpetError::Resource(
                    "expansion period exceeds the iteration budget".into(),
                ));
            }
            let prod = &rem * &bb;
            let (digit, next) = prod.div_rem(&den);
            digits.push(digit.to_u32().expect("digit < base"));
            rem = next;
            if let Some(&s) = seen.get(&rem) {
                let period = digits.split_off(s);
                return Ok(vec![Self::new(base, digits, period)?]);
            }
            seen.insert(rem.clone(), digits.len());
        }
    }
}

impl std::fmt::Display for EventuallyPeriodicDigits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pre: Vec<String> = self.preperiod.iter().map(|d| d.to_string()).collect();
        let per: Vec<String> = self.period.iter().map(|d| d.to_string()).collect();
        write!(f, "{}({})", pre.join(""), per.join(""))
    }
}

// ---------------------------------------------------------------------------
// DeletedDigitSet
// ---------------------------------------------------------------------------

/// The self-similar set E(base, digits) ⊂ [0,1] of points with some base-b
/// expansion using only the listed digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletedDigitSet {
    base: u32,
    digits: BTreeSet<u32>,
}

impl DeletedDigitSet {
    pub fn new(base: u32, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        if base < 2 {
            return Err(CarpetError::Validation("digit-set base must be at least 2".into()));
        }
        let digits: BTreeSet<u32> = digits.into_iter().collect();
        if digits.is_empty() {
            return Err(CarpetError::Validation("digit set must be non-empty".into()));
        }
        if let Some(&d) = digits.iter().next_back() {
            if d >= base {
                return Err(CarpetError::Validation(format!(
                    "digit {d} out of range for base {base}"
                )));
            }
        }
        Ok(DeletedDigitSet { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &BTreeSet<u32> {
        &self.digits
    }

    /// The set has non-empty interior exactly when every digit is allowed
    /// (then it is all of [0,1]).
    pub fn has_full_interior(&self) -> bool {
        self.digits.len() == self.base as usize
    }

    /// Level-k outer approximation E_k as intervals [a, a+1]/base^k.
    pub fn approx(&self, k: u32) -> Result<DigitSetApprox> {
        self.approx_with_budget(k, DEFAULT_INTERVAL_BUDGET)
    }

    pub fn approx_with_budget(&self, k: u32, budget: usize) -> Result<DigitSetApprox> {
        pow_u128(self.base, k)?;
        let mut endpoints: Vec<u128> = vec![0];
        for _ in 0..k {
            if endpoints.len().saturating_mul(self.digits.len()) > budget {
                return Err(CarpetError::Resource(format!(
                    "interval count exceeds budget {budget}; raise the budget"
                )));
            }
            let mut next = Vec::with_capacity(endpoints.len() * self.digits.len());
            for e in &endpoints {
                for &d in &self.digits {
                    next.push(e * self.base as u128 + d as u128);
                }
            }
            endpoints = next;
        }
        let components = merge_unit_intervals(&endpoints);
        Ok(DigitSetApprox { base: self.base, level: k, left_endpoints: endpoints, components })
    }
}

/// Level-k approximation of a deleted-digit set: the raw interval list and
/// the maximal components after merging endpoint-sharing neighbours.
#[derive(Debug, Clone)]
pub struct DigitSetApprox {
    pub base: u32,
    pub level: u32,
    /// Sorted left endpoints a: intervals [a, a+1] in units of base^{-level}.
    pub left_endpoints: Vec<u128>,
    /// Maximal merged runs (lo, hi) meaning [lo, hi] in the same units.
    pub components: Vec<(u128, u128)>,
}

impl DigitSetApprox {
    pub fn unit(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.base).pow(self.level))
    }

    /// Pairs of raw intervals sharing an endpoint ("adjacent" in the
    /// dichotomy: intervals of E_k are either adjacent or disjoint).
    pub fn adjacent_pairs(&self) -> usize {
        self.left_endpoints.windows(2).filter(|w| w[1] == w[0] + 1).count()
    }
}

/// Merge sorted unit intervals [a, a+1] into maximal components.
fn merge_unit_intervals(sorted: &[u128]) -> Vec<(u128, u128)> {
    let mut out: Vec<(u128, u128)> = Vec::new();
    for &a in sorted {
        match out.last_mut() {
            Some((_, hi)) if *hi == a => *hi = a + 1,
            _ => out.push((a, a + 1)),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Slices
// ---------------------------------------------------------------------------

/// Level-p outer approximation of a horizontal slice: the union of closed
/// intervals [a, a+1]/n^p over the admissible digit words of length p.
#[derive(Debug, Clone)]
pub struct SliceApprox {
    pub level: u32,
    pub base: u32,
    /// Sorted integers a with 0 ≤ a < n^p; interval [a/n^p, (a+1)/n^p].
    pub left_endpoints: Vec<u128>,
}

impl SliceApprox {
    pub fn interval_count(&self) -> usize {
        self.left_endpoints.len()
    }

    pub fn unit(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.base).pow(self.level))
    }
}

/// Row digit sets along the slice: I_{y_k} for k = 1..=len. Errors when some
/// y-digit addresses an empty row (y is then not in the second projection).
fn row_sets<'p>(
    pattern: &'p CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    len: u64,
) -> Result<Vec<&'p BTreeSet<u32>>> {
    if ydigits.base() != pattern.m() {
        return Err(CarpetError::Domain(format!(
            "slice digits are base {} but the pattern has m = {}",
            ydigits.base(),
            pattern.m()
        )));
    }
    (1..=len)
        .map(|k| {
            let j = ydigits.digit(k);
            let row = pattern.row_digits(j);
            if row.is_empty() {
                Err(CarpetError::Domain(format!(
                    "y-digit {j} at position {k} addresses an empty row"
                )))
            } else {
                Ok(row)
            }
        })
        .collect()
}

/// Every base-m expansion of y whose digits all lie in the pattern's row set
/// J. An empty result means y is outside the vertical projection.
pub fn slice_digits(
    pattern: &CarpetPattern,
    y: &BigRational,
) -> Result<Vec<EventuallyPeriodicDigits>> {
    let expansions = EventuallyPeriodicDigits::expansions_of(y, pattern.m())?;
    Ok(expansions.into_iter().filter(|e| e.digits_within(pattern.row_set())).collect())
}

/// The level-p approximation K^y_p of the horizontal slice through y, where
/// y is given by its digit sequence.
pub fn slice_approx(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    p: u32,
) -> Result<SliceApprox> {
    slice_approx_with_budget(pattern, ydigits, p, DEFAULT_INTERVAL_BUDGET)
}

pub fn slice_approx_with_budget(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    p: u32,
    budget: usize,
) -> Result<SliceApprox> {
    pow_u128(pattern.n(), p)?;
    let rows = row_sets(pattern, ydigits, p as u64)?;
    let mut endpoints: Vec<u128> = vec![0];
    for row in rows {
        if endpoints.len().saturating_mul(row.len()) > budget {
            return Err(CarpetError::Resource(format!(
                "slice interval count exceeds budget {budget}; raise the budget"
            )));
        }
        let mut next = Vec::with_capacity(endpoints.len() * row.len());
        for e in &endpoints {
            for &x in row {
                next.push(e * pattern.n() as u128 + x as u128);
            }
        }
        endpoints = next;
    }
    Ok(SliceApprox { level: p, base: pattern.n(), left_endpoints: endpoints })
}

/// Decide exactly whether the rational x lies on the slice K^y, i.e. whether
/// some base-n expansion of x has its k-th digit in I_{y_k} for every k.
pub fn slice_contains(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    x: &BigRational,
) -> Result<bool> {
    if ydigits.base() != pattern.m() {
        return Err(CarpetError::Domain("slice digits base mismatch".into()));
    }
    let expansions = EventuallyPeriodicDigits::expansions_of(x, pattern.n())?;
    for xd in &expansions {
        let pre = xd.preperiod().len().max(ydigits.preperiod().len()) as u64;
        let cycle = num_integer::lcm(xd.period().len() as u64, ydigits.period().len() as u64);
        let ok = (1..=pre + cycle).all(|k| {
            let row = pattern.row_digits(ydigits.digit(k));
            row.contains(&xd.digit(k))
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Slice dimension
// ---------------------------------------------------------------------------

/// An exact ratio of logarithms `log(product) / (period · log base)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRatio {
    /// Integer whose logarithm is the numerator.
    pub product: BigUint,
    /// Denominator is `period · log base`.
    pub base: u32,
    pub period: u32,
}

impl LogRatio {
    /// Exact equality via cross-powers: log a/(p log b) = log c/(q log b)
    /// iff a^q = c^p.
    pub fn eq_exact(&self, other: &LogRatio) -> bool {
        assert_eq!(self.base, other.base, "comparison across bases");
        self.product.pow(other.period) == other.product.pow(self.period)
    }

    pub fn to_f64(&self) -> f64 {
        let mut ln = 0.0f64;
        // Work prime-free: ln of a BigUint via its decimal digits.
        let s = self.product.to_string();
        let head: f64 = s[..s.len().min(17)].parse().unwrap_or(f64::NAN);
        ln += head.ln() + (s.len().saturating_sub(17)) as f64 * std::f64::consts::LN_10;
        ln / (self.period as f64 * (self.base as f64).ln())
    }
}

impl std::fmt::Display for LogRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "log({})/({}*log({}))", self.product, self.period, self.base)
    }
}

/// Slice dimension report: the exact lower box-counting dimension of K^y for
/// an eventually periodic y, the universal bound log N / log n, and whether
/// the slice attains it.
#[derive(Debug, Clone)]
pub struct SliceDimension {
    pub value: LogRatio,
    pub bound: LogRatio,
    pub attains_bound: bool,
    /// Row counts #I_{y_k} over one period, in order.
    pub row_counts: Vec<u64>,
}

/// The limit of (Σ_{k≤M} log #I_{y_k}) / (M log n) — for eventually periodic
/// digits this is the period average (the preperiod washes out).
pub fn slice_lower_box_dim(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
) -> Result<SliceDimension> {
    let pre_len = ydigits.preperiod().len() as u64;
    let per_len = ydigits.period().len() as u64;
    // Validate the whole preperiod too: the slice must exist.
    row_sets(pattern, ydigits, pre_len + per_len)?;
    let mut product = BigUint::one();
    let mut row_counts = Vec::new();
    for k in pre_len + 1..=pre_len + per_len {
        let c = pattern.row_digits(ydigits.digit(k)).len() as u64;
        row_counts.push(c);
        product *= BigUint::from(c);
    }
    let n_max = pattern.max_row_count() as u64;
    let value = LogRatio { product: product.clone(), base: pattern.n(), period: per_len as u32 };
    let bound = LogRatio { product: BigUint::from(n_max), base: pattern.n(), period: 1 };
    let attains = product == BigUint::from(n_max).pow(per_len as u32);
    Ok(SliceDimension { value, bound, attains_bound: attains, row_counts })
}

// ---------------------------------------------------------------------------
// Gaps
// ---------------------------------------------------------------------------

/// An open interval certified to contain no basic interval of the slice
/// approximation at the certification level (hence disjoint from K^y).
#[derive(Debug, Clone)]
pub struct GapInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub certified_disjoint: bool,
}

/// Gap report for one outer level p against a certification level p′.
#[derive(Debug, Clone)]
pub struct SliceGapReport {
    pub outer_level: u32,
    pub cert_level: u32,
    pub gaps: Vec<GapInterval>,
    /// max |G| · n^p over all gaps, None when there are none.
    pub max_scaled_gap: Option<BigRational>,
}

/// For each basic interval U of K^y_p, the maximal open subintervals of U
/// lying strictly between basic intervals of K^y_{p′} (the finite-level
/// gaps of the slice inside U). Leading and trailing slack inside U is not a
/// gap: a gap sits between slice material on both sides.
pub fn slice_gaps(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    p: u32,
    p_prime: u32,
) -> Result<SliceGapReport> {
    if p > p_prime {
        return Err(CarpetError::Precondition(format!(
            "outer level {p} must not exceed certification level {p_prime}"
        )));
    }
    let outer = slice_approx(pattern, ydigits, p)?;
    // By translation equality the refinement pattern inside each U is the
    // same: enumerate the digit suffixes for positions p+1..=p′ once.
    let rows = row_sets(pattern, ydigits, p_prime as u64)?;
    let mut suffix: Vec<u128> = vec![0];
    for row in &rows[p as usize..] {
        let mut next = Vec::with_capacity(suffix.len() * row.len());
        for e in &suffix {
            for &x in row.iter() {
                next.push(e * pattern.n() as u128 + x as u128);
            }
        }
        suffix = next;
    }
    let components = merge_unit_intervals(&suffix);
    let shift = pow_u128(pattern.n(), p_prime - p)?;
    let denom = BigInt::from(pattern.n()).pow(p_prime);
    let mut gaps = Vec::new();
    let mut max_scaled: Option<BigRational> = None;
    for &a in &outer.left_endpoints {
        let base_units = a * shift;
        for w in components.windows(2) {
            let (lo_units, hi_units) = (base_units + w[0].1, base_units + w[1].0);
            let lo = BigRational::new(BigInt::from(lo_units), denom.clone());
            let hi = BigRational::new(BigInt::from(hi_units), denom.clone());
            let scaled = (&hi - &lo) * BigRational::from(BigInt::from(pattern.n())).pow(p as i32);
            if max_scaled.as_ref().is_none_or(|m| &scaled > m) {
                max_scaled = Some(scaled);
            }
            gaps.push(GapInterval { lo, hi, certified_disjoint: true });
        }
    }
    Ok(SliceGapReport { outer_level: p, cert_level: p_prime, gaps, max_scaled_gap: max_scaled })
}

// ---------------------------------------------------------------------------
// Isolated points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsolationSide {
    Left,
    Right,
}

/// A slice point with a certified one-sided empty neighbourhood.
#[derive(Debug, Clone)]
pub struct IsolatedPoint {
    pub point: BigRational,
    pub side: IsolationSide,
    /// The certified empty open interval is (point−radius, point) on the
    /// left side, (point, point+radius) on the right.
    pub radius: BigRational,
    pub depth: u32,
}

/// Certified one-sided isolated points of the slice at a finite depth.
///
/// Sound but incomplete: a returned point provably has an empty open
/// interval of length n^{-depth} on the given side (no level-`depth` basic
/// interval meets it, and K^y lies inside those intervals), and the point
/// itself is verified to lie on the slice. Points isolated only at deeper
/// resolutions are missed.
pub fn isolated_points(
    pattern: &CarpetPattern,
    ydigits: &EventuallyPeriodicDigits,
    side: IsolationSide,
    depth: u32,
) -> Result<Vec<IsolatedPoint>> {
    if depth < 1 {
        return Err(CarpetError::Precondition("isolation depth must be at least 1".into()));
    }
    let approx = slice_approx(pattern, ydigits, depth)?;
    let endpoints: BTreeSet<u128> = approx.left_endpoints.iter().copied().collect();
    let denom = BigInt::from(pattern.n()).pow(depth);
    let radius = BigRational::new(BigInt::one(), denom.clone());
    let mut out = Vec::new();
    for &a in &approx.left_endpoints {
        let candidate_units = match side {
            IsolationSide::Left => {
                // Left endpoint a/n^depth; empty on the left unless the
                // neighbouring interval [a−1, a] is present.
                if a > 0 && endpoints.contains(&(a - 1)) {
                    continue;
                }
                a
            }
            IsolationSide::Right => {
                // Right endpoint (a+1)/n^depth; empty on the right unless
                // [a+1, a+2] is present.
                if endpoints.contains(&(a + 1)) {
                    continue;
                }
                a + 1
            }
        };
        let point = BigRational::new(BigInt::from(candidate_units), denom.clone());
        if slice_contains(pattern, ydigits, &point)? {
            out.push(IsolatedPoint { point, side, radius: radius.clone(), depth });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// The two coordinate projections of the carpet as deleted-digit sets:
/// horizontally E(n, I), vertically E(m, J).
pub fn projections(pattern: &CarpetPattern) -> (DeletedDigitSet, DeletedDigitSet) {
    let horiz = DeletedDigitSet::new(pattern.n(), pattern.column_set().iter().copied())
        .expect("pattern columns are a valid digit set");
    let vert = DeletedDigitSet::new(pattern.m(), pattern.row_set().iter().copied())
        .expect("pattern rows are a valid digit set");
    (horiz, vert)
}
