//! Certification and refutation of similitudes mapping a carpet into itself.
//!
//! Three mechanisms, in increasing generality:
//!
//! * digit-level symmetry certificates for square patterns — an exact finite
//!   check that O·d + c permutes the digit set, which forces the induced map
//!   O·z + c/(n−1) to carry the carpet onto itself;
//! * a breadth-first grid certifier for axis-aligned maps whose scale is a
//!   grid power and whose translation is adic — tri-state verdicts with
//!   exact refutation witnesses;
//! * a point-sampling refutation harness for arbitrary rational-scale maps.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{CarpetError, Result};
use crate::pattern::CarpetPattern;
use crate::ratio::floor_int;
use crate::similitude::{
    enumerate_rational_orthogonals, log_commensurable, OrthogonalKind, Point,
    RationalOrthogonal, RationalSimilitude, ScaleValue,
};

/// Default cap on explored states in the grid certifier.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

// ---------------------------------------------------------------------------
// SymmetryCertificate
// ---------------------------------------------------------------------------

/// One source digit and its image under a digit symmetry.
pub type DigitMapping = ((u32, u32), (u32, u32));

/// A verified digit-level symmetry of a square pattern: the orthogonal part
/// O and per-digit offset c satisfy O·d + c ∈ Λ for every digit d, and the
/// assignment is a bijection. Summing the identity over digit expansions
/// shows the induced map z ↦ O·z + c/(n−1) maps the carpet onto itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCertificate {
    orthogonal: RationalOrthogonal,
    per_digit_offset: Point,
    global_translation: Point,
    permutation: Vec<DigitMapping>,
}

impl SymmetryCertificate {
    pub fn orthogonal(&self) -> &RationalOrthogonal {
        &self.orthogonal
    }

    /// The exact offset c in the digit identity O·d + c.
    pub fn per_digit_offset(&self) -> &Point {
        &self.per_digit_offset
    }

    /// The translation c/(n−1) of the induced map on the carpet.
    pub fn global_translation(&self) -> &Point {
        &self.global_translation
    }

    /// The digit bijection, sorted by source digit.
    pub fn permutation(&self) -> &[DigitMapping] {
        &self.permutation
    }

    /// The induced unit-scale similitude z ↦ O·z + c/(n−1).
    pub fn to_similitude(&self) -> RationalSimilitude {
        RationalSimilitude::new(
            ScaleValue::one(),
            self.orthogonal.clone(),
            self.global_translation.clone(),
        )
    }
}

impl std::fmt::Display for SymmetryCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "orthogonal: {}", self.orthogonal)?;
        writeln!(
            f,
            "perDigitOffset: ({}, {})",
            self.per_digit_offset.0, self.per_digit_offset.1
        )?;
        writeln!(
            f,
            "globalTranslation: ({}, {})",
            self.global_translation.0, self.global_translation.1
        )?;
        writeln!(f, "permutation:")?;
        for ((a, b), (c, d)) in &self.permutation {
            writeln!(f, "  ({a}, {b}) -> ({c}, {d})")?;
        }
        Ok(())
    }
}

/// Exact check of the digit identity O·d + c ∈ Λ (bijectively) for a square
/// pattern. Returns the certificate when it holds, None when it fails.
pub fn digit_symmetry_check(
    pattern: &CarpetPattern,
    orthogonal: &RationalOrthogonal,
    offset: &Point,
) -> Result<Option<SymmetryCertificate>> {
    if pattern.n() != pattern.m() {
        return Err(CarpetError::UnsupportedComposition(
            "the digit identity needs a common horizontal and vertical base".into(),
        ));
    }
    let mut permutation = Vec::with_capacity(pattern.digit_count());
    let mut targets: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &(i, j) in pattern.digits() {
        let source = (BigRational::from(BigInt::from(i)), BigRational::from(BigInt::from(j)));
        let (ox, oy) = orthogonal.apply(&source);
        let image = (ox + &offset.0, oy + &offset.1);
        if !image.0.is_integer() || !image.1.is_integer() {
            return Ok(None);
        }
        let (ti, tj) = (image.0.to_integer(), image.1.to_integer());
        let in_grid = !ti.is_negative()
            && !tj.is_negative()
            && ti < BigInt::from(pattern.n())
            && tj < BigInt::from(pattern.m());
        if !in_grid {
            return Ok(None);
        }
        let target: (u32, u32) =
            (ti.try_into().expect("checked range"), tj.try_into().expect("checked range"));
        if !pattern.digits().contains(&target) || !targets.insert(target) {
            return Ok(None);
        }
        permutation.push(((i, j), target));
    }
    let denom = BigRational::from(BigInt::from(pattern.n() - 1));
    let global = (&offset.0 / &denom, &offset.1 / &denom);
    Ok(Some(SymmetryCertificate {
        orthogonal: orthogonal.clone(),
        per_digit_offset: offset.clone(),
        global_translation: global,
        permutation,
    }))
}

/// Exact centroid of the digit set.
fn digit_centroid(pattern: &CarpetPattern) -> Point {
    let count = BigInt::from(pattern.digit_count());
    let mut sx = BigInt::zero();
    let mut sy = BigInt::zero();
    for &(i, j) in pattern.digits() {
        sx += BigInt::from(i);
        sy += BigInt::from(j);
    }
    (BigRational::new(sx, count.clone()), BigRational::new(sy, count))
}

/// Finds every digit-level symmetry whose orthogonal part has hypotenuse at
/// most `max_hypotenuse`. A digit bijection fixes the centroid of Λ, so the
/// offset is forced to c = μ − O·μ — one candidate per orthogonal part.
pub fn symmetry_search(
    pattern: &CarpetPattern,
    max_hypotenuse: u64,
) -> Result<Vec<SymmetryCertificate>> {
    if pattern.n() != pattern.m() {
        return Err(CarpetError::UnsupportedComposition(
            "the digit identity needs a common horizontal and vertical base".into(),
        ));
    }
    if pattern.classify()?.line_supported {
        return Err(CarpetError::DegenerateHull(
            "all cylinder fixed points are collinear".into(),
        ));
    }
    let centroid = digit_centroid(pattern);
    let candidates = enumerate_rational_orthogonals(max_hypotenuse)?;
    let certificates: Vec<Result<Option<SymmetryCertificate>>> = candidates
        .par_iter()
        .map(|o| {
            let (mx, my) = o.apply(&centroid);
            let c = (&centroid.0 - mx, &centroid.1 - my);
            digit_symmetry_check(pattern, o, &c)
        })
        .collect();
    let mut out = Vec::new();
    for c in certificates {
        if let Some(cert) = c? {
            out.push(cert);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Grid containment certifier
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainmentStatus {
    Certified,
    Refuted,
    Unknown,
}

/// Outcome of the grid certifier. A refutation carries an exact witness:
/// a source point of the carpet whose image under the map is provably
/// outside the carpet.
#[derive(Debug, Clone)]
pub struct ContainmentVerdict {
    pub status: ContainmentStatus,
    /// (source, image): source passes the membership check, image fails it.
    pub witness: Option<(Point, Point)>,
    /// Deepest grid refinement level reached during exploration.
    pub depth: u32,
    /// Number of distinct offset states explored.
    pub state_count: usize,
}

/// Minimal k with denominator(q) | base^k, if one exists.
fn adic_exponent(q: &BigRational, base: u32) -> Option<u32> {
    let b = BigInt::from(base);
    let mut rest = q.denom().clone();
    let mut k = 0u32;
    loop {
        if rest.is_one() {
            return Some(k);
        }
        let g = num_integer::Integer::gcd(&rest, &b);
        if g.is_one() {
            return None;
        }
        rest /= g;
        k += 1;
    }
}

/// p with λ = base^{-p}, if λ is such a power (p = 0 for λ = 1).
fn power_exponent(lambda: &BigRational, base: u32) -> Option<u32> {
    if !lambda.numer().is_one() || lambda.is_negative() {
        return None;
    }
    let b = BigInt::from(base);
    let mut den = lambda.denom().clone();
    let mut p = 0u32;
    while !den.is_one() {
        let (q, r) = num_integer::Integer::div_rem(&den, &b);
        if !r.is_zero() {
            return None;
        }
        den = q;
        p += 1;
    }
    Some(p)
}

/// One BFS state: the affine map h = φ_E^{-1} ∘ f ∘ φ_D reduced to its
/// contraction exponent, axis signs, optional axis swap and exact offsets:
/// h(x, y) = (εx·n^{-p}·u + x0, εy·m^{-p}·v + y0) with (u, v) = (x, y) or
/// (y, x) under swap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GridState {
    p: u32,
    swap: bool,
    sx: i8,
    sy: i8,
    x0: BigRational,
    y0: BigRational,
}

impl GridState {
    /// Closed image rectangle of the unit square: ([xlo, xhi], [ylo, yhi]).
    fn image_rect(
        &self,
        n: u32,
        m: u32,
    ) -> ((BigRational, BigRational), (BigRational, BigRational)) {
        let wx = BigRational::new(BigInt::one(), BigInt::from(n).pow(self.p));
        let wy = BigRational::new(BigInt::one(), BigInt::from(m).pow(self.p));
        let xs = if self.sx > 0 {
            (self.x0.clone(), &self.x0 + &wx)
        } else {
            (&self.x0 - &wx, self.x0.clone())
        };
        let ys = if self.sy > 0 {
            (self.y0.clone(), &self.y0 + &wy)
        } else {
            (&self.y0 - &wy, self.y0.clone())
        };
        (xs, ys)
    }

    /// Compose with a cylinder map on the source side: h ∘ φ_d.
    fn split(&self, n: u32, m: u32, digit: (u32, u32)) -> GridState {
        let (du, dv) = if self.swap { (digit.1, digit.0) } else { (digit.0, digit.1) };
        let nx = BigRational::new(
            BigInt::from(self.sx) * BigInt::from(du),
            BigInt::from(n).pow(self.p + 1),
        );
        let ny = BigRational::new(
            BigInt::from(self.sy) * BigInt::from(dv),
            BigInt::from(m).pow(self.p + 1),
        );
        GridState {
            p: self.p + 1,
            swap: self.swap,
            sx: self.sx,
            sy: self.sy,
            x0: &self.x0 + nx,
            y0: &self.y0 + ny,
        }
    }

    /// Compose with an inverse cylinder map on the target side: φ_e^{-1} ∘ h.
    fn descend(&self, n: u32, m: u32, cell: (i64, i64)) -> GridState {
        GridState {
            p: self.p - 1,
            swap: self.swap,
            sx: self.sx,
            sy: self.sy,
            x0: &self.x0 * BigRational::from(BigInt::from(n)) - BigRational::from(BigInt::from(cell.0)),
            y0: &self.y0 * BigRational::from(BigInt::from(m)) - BigRational::from(BigInt::from(cell.1)),
        }
    }
}

/// Span of a closed interval against the level-1 grid with `base` cells:
/// either strictly inside one column (its index, possibly out of range) or
/// straddling a grid line in its interior.
enum GridSpan {
    Cell(i64),
    Straddles,
}

fn grid_span(lo: &BigRational, hi: &BigRational, base: u32) -> GridSpan {
    let a = lo * BigRational::from(BigInt::from(base));
    let b = hi * BigRational::from(BigInt::from(base));
    let g = floor_int(&a) + BigInt::one();
    let gq = BigRational::from(g.clone());
    if gq > a && gq < b {
        return GridSpan::Straddles;
    }
    let col = floor_int(&a);
    GridSpan::Cell(i64::try_from(&col).unwrap_or(i64::MAX))
}

/// Is the unit-scale state exactly the unit square (so the map is a grid
/// isometry of [0,1]²)?
fn is_unit_isometry(state: &GridState) -> bool {
    state.p == 0
        && ((state.sx > 0 && state.x0.is_zero()) || (state.sx < 0 && state.x0.is_one()))
        && ((state.sy > 0 && state.y0.is_zero()) || (state.sy < 0 && state.y0.is_one()))
}

/// Digit image under a unit grid isometry: integer offsets cx = x0·(n−1),
/// cy = y0·(m−1); under swap the roles of the digit coordinates exchange.
fn isometry_digit_image(
    state: &GridState,
    n: u32,
    m: u32,
    digit: (u32, u32),
) -> (i64, i64) {
    let (du, dv) = if state.swap { (digit.1 as i64, digit.0 as i64) } else { (digit.0 as i64, digit.1 as i64) };
    let cx = if state.sx > 0 { 0 } else { (n - 1) as i64 };
    let cy = if state.sy > 0 { 0 } else { (m - 1) as i64 };
    (state.sx as i64 * du + cx, state.sy as i64 * dv + cy)
}

/// Check whether a unit grid isometry permutes the digit set. Such a map has
/// finite order, so mapping the carpet into itself forces mapping it onto
/// itself, which is exactly the digit bijection.
fn isometry_is_digit_bijection(state: &GridState, pattern: &CarpetPattern) -> bool {
    let mut seen = BTreeSet::new();
    for &d in pattern.digits() {
        let (i, j) = isometry_digit_image(state, pattern.n(), pattern.m(), d);
        if i < 0 || j < 0 || i >= pattern.n() as i64 || j >= pattern.m() as i64 {
            return false;
        }
        let t = (i as u32, j as u32);
        if !pattern.digits().contains(&t) || !seen.insert(t) {
            return false;
        }
    }
    true
}

/// Certify or refute f(K) ⊆ K for a grid-aligned map f: axis-aligned
/// orthogonal part, per-axis scales n^{-p} and m^{-p} for one p ≥ 0, and
/// adic translation. Runs a breadth-first exploration of the offset states;
/// every refutation is confirmed by an exact witness point before being
/// reported, and exceeding the state budget yields an unknown verdict.
pub fn grid_containment_certify(
    pattern: &CarpetPattern,
    f: &RationalSimilitude,
) -> Result<ContainmentVerdict> {
    grid_containment_certify_with_budget(pattern, f, DEFAULT_STATE_BUDGET)
}

pub fn grid_containment_certify_with_budget(
    pattern: &CarpetPattern,
    f: &RationalSimilitude,
    budget: usize,
) -> Result<ContainmentVerdict> {
    let (n, m) = (pattern.n(), pattern.m());
    let o = f.orthogonal();
    if !o.is_axis_aligned() {
        return Err(CarpetError::Precondition(
            "orthogonal part is not axis-aligned; use the point-sampling refuter".into(),
        ));
    }
    if o.swaps_axes() && n != m {
        return Err(CarpetError::Precondition(
            "axis swap needs a common horizontal and vertical base".into(),
        ));
    }
    let (sx_rat, sy_rat) = match f.diagonal_scales() {
        Some((a, b)) => (a.clone(), b.clone()),
        None => {
            let l = f.scale().as_rational().ok_or_else(|| {
                CarpetError::Precondition("scale is not rational".into())
            })?;
            (l.clone(), l)
        }
    };
    let px = power_exponent(&sx_rat, n).ok_or_else(|| {
        CarpetError::Precondition(format!(
            "horizontal scale {sx_rat} is not a non-positive power of {n}"
        ))
    })?;
    let py = power_exponent(&sy_rat, m).ok_or_else(|| {
        CarpetError::Precondition(format!(
            "vertical scale {sy_rat} is not a non-positive power of {m}"
        ))
    })?;
    if px != py {
        return Err(CarpetError::Precondition(format!(
            "per-axis grid exponents differ ({px} vs {py})"
        )));
    }
    let t = f.translation();
    if adic_exponent(&t.0, n).is_none() || adic_exponent(&t.1, m).is_none() {
        return Err(CarpetError::Precondition(
            "translation is not adic for the grid; use the point-sampling refuter".into(),
        ));
    }
    // Extract axis signs (and swap) from the orthogonal matrix.
    let ((m00, m01), (m10, m11)) = o.matrix();
    let swap = o.swaps_axes();
    let sgn = |r: &BigRational| -> i8 {
        if r.is_positive() {
            1
        } else {
            -1
        }
    };
    let (sx, sy) = if swap { (sgn(&m01), sgn(&m10)) } else { (sgn(&m00), sgn(&m11)) };

    let start = GridState { p: px, swap, sx, sy, x0: t.0.clone(), y0: t.1.clone() };
    let digits: Vec<(u32, u32)> = pattern.digits().iter().copied().collect();
    let mut visited: BTreeSet<GridState> = BTreeSet::new();
    let mut queue: VecDeque<(GridState, Vec<(u32, u32)>)> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back((start, Vec::new()));
    let mut max_depth = px;
    while let Some((state, source_word)) = queue.pop_front() {
        if visited.len() > budget {
            return Ok(ContainmentVerdict {
                status: ContainmentStatus::Unknown,
                witness: None,
                depth: max_depth,
                state_count: visited.len(),
            });
        }
        max_depth = max_depth.max(state.p + source_word.len() as u32);
        if is_unit_isometry(&state) {
            if isometry_is_digit_bijection(&state, pattern) {
                continue; // branch certified: finite-order isometry onto K
            }
            if let Some(w) = confirm_witness(pattern, f, &source_word, &digits)? {
                return Ok(ContainmentVerdict {
                    status: ContainmentStatus::Refuted,
                    witness: Some(w),
                    depth: max_depth,
                    state_count: visited.len(),
                });
            }
            push_splits(&state, &source_word, &digits, n, m, &mut visited, &mut queue);
            continue;
        }
        let ((xlo, xhi), (ylo, yhi)) = state.image_rect(n, m);
        let span_x = grid_span(&xlo, &xhi, n);
        let span_y = grid_span(&ylo, &yhi, m);
        match (span_x, span_y) {
            (GridSpan::Cell(i), GridSpan::Cell(j)) => {
                let selected = i >= 0
                    && j >= 0
                    && i < n as i64
                    && j < m as i64
                    && pattern.digits().contains(&(i as u32, j as u32));
                if selected && state.p >= 1 {
                    let child = state.descend(n, m, (i, j));
                    if visited.insert(child.clone()) {
                        queue.push_back((child, source_word.clone()));
                    }
                } else if selected {
                    // p = 0 inside one cell: a unit square cannot fit in a
                    // single cell unless n = 1, so this cannot happen.
                    unreachable!("unit-scale image inside a single cell");
                } else {
                    // image sits over unselected territory: confirm exactly
                    if let Some(w) = confirm_witness(pattern, f, &source_word, &digits)? {
                        return Ok(ContainmentVerdict {
                            status: ContainmentStatus::Refuted,
                            witness: Some(w),
                            depth: max_depth,
                            state_count: visited.len(),
                        });
                    }
                    push_splits(&state, &source_word, &digits, n, m, &mut visited, &mut queue);
                }
            }
            _ => {
                push_splits(&state, &source_word, &digits, n, m, &mut visited, &mut queue);
            }
        }
    }
    Ok(ContainmentVerdict {
        status: ContainmentStatus::Certified,
        witness: None,
        depth: max_depth,
        state_count: visited.len(),
    })
}

fn push_splits(
    state: &GridState,
    source_word: &[(u32, u32)],
    digits: &[(u32, u32)],
    n: u32,
    m: u32,
    visited: &mut BTreeSet<GridState>,
    queue: &mut VecDeque<(GridState, Vec<(u32, u32)>)>,
) {
    for &d in digits {
        let child = state.split(n, m, d);
        if visited.insert(child.clone()) {
            let mut word = source_word.to_vec();
            word.push(d);
            queue.push_back((child, word));
        }
    }
}

/// Try to produce an exact refutation witness in the source cylinder
/// φ_D(K): for each digit, take φ_D applied to that digit's fixed point,
/// and test the image under f. Returns the first (source, image) pair with
/// source in the carpet and image provably outside.
fn confirm_witness(
    pattern: &CarpetPattern,
    f: &RationalSimilitude,
    source_word: &[(u32, u32)],
    digits: &[(u32, u32)],
) -> Result<Option<(Point, Point)>> {
    for &d in digits {
        let mut z = pattern.cylinder_fixed_point(d)?;
        for &w in source_word.iter().rev() {
            z = pattern.cylinder_map(w)?.apply(&z)?;
        }
        if !pattern.contains_point(&z.0, &z.1)? {
            continue;
        }
        let image = f.apply(&z)?;
        if !pattern.contains_point(&image.0, &image.1)? {
            return Ok(Some((z, image)));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Point-sampling refutation
// ---------------------------------------------------------------------------

/// An exact counterexample to f(K) ⊆ K.
#[derive(Debug, Clone)]
pub struct RefutationWitness {
    /// Periodic address of the source point.
    pub word: Vec<(u32, u32)>,
    pub source: Point,
    pub image: Point,
}

/// Samples exact carpet points (periodic addresses up to the given length),
/// applies f, and tests membership of the image. Returns the first
/// counterexample, or None if every sampled image stays in the carpet
/// (inconclusive).
pub fn refute_embedding(
    pattern: &CarpetPattern,
    f: &RationalSimilitude,
    depth: u32,
) -> Result<Option<RefutationWitness>> {
    if f.scale().as_rational().is_none() && f.diagonal_scales().is_none() {
        return Err(CarpetError::UnsupportedComposition(
            "scale is not rational; images of rational points are not rational".into(),
        ));
    }
    let digits: Vec<(u32, u32)> = pattern.digits().iter().copied().collect();
    let mut words: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(words.len() * digits.len());
        for w in &words {
            for &d in &digits {
                let mut w2 = w.clone();
                w2.push(d);
                next.push(w2);
            }
        }
        for w in &next {
            let source = pattern.periodic_point(w)?;
            let image = f.apply(&source)?;
            if !pattern.contains_point(&image.0, &image.1)? {
                return Ok(Some(RefutationWitness { word: w.clone(), source, image }));
            }
        }
        words = next;
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Prefilter
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOutcome {
    NotApplicable,
    Passes,
    RuledOut,
}

/// Necessary-condition screening for "f maps the carpet into itself".
/// Each rule reports pass/ruled-out/not-applicable; a single ruled-out
/// settles the question negatively without any search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefilterReport {
    /// Strictly affine carpets (n > m) not supported on a line admit no
    /// oblique self-embedding.
    pub oblique_affine: RuleOutcome,
    /// When ln n / ln m is rational, the contraction ratio λ of any
    /// self-embedding satisfies ln λ / ln n ∈ ℚ.
    pub scale_commensurability: RuleOutcome,
    /// Square carpets with verified separation admit oblique rotations only
    /// with |tan θ| = 1 (reflections are not constrained by this rule).
    pub rotation_tangent: RuleOutcome,
    /// Depth at which the separation condition was verified, when needed.
    pub separation_depth: Option<u32>,
}

impl PrefilterReport {
    pub fn passes(&self) -> bool {
        [self.oblique_affine, self.scale_commensurability, self.rotation_tangent]
            .iter()
            .all(|r| *r != RuleOutcome::RuledOut)
    }
}

/// Apply the necessary conditions for a self-embedding to f.
pub fn embedding_prefilter(
    pattern: &CarpetPattern,
    f: &RationalSimilitude,
) -> Result<PrefilterReport> {
    let class = pattern.classify()?;
    let oblique = !f.is_diagonal_affine() && f.is_oblique()?;

    let oblique_affine = if pattern.n() == pattern.m() || class.line_supported {
        RuleOutcome::NotApplicable
    } else if oblique {
        RuleOutcome::RuledOut
    } else {
        RuleOutcome::Passes
    };

    let scale_commensurability = if class.log_ratio_rational {
        let n_sv = ScaleValue::from_u64(pattern.n() as u64)?;
        if log_commensurable(f.scale(), &n_sv)?.is_some() {
            RuleOutcome::Passes
        } else {
            RuleOutcome::RuledOut
        }
    } else {
        RuleOutcome::NotApplicable
    };

    let mut separation_depth = None;
    // the tangent rule constrains oblique rotations of square carpets only;
    // reflections are exempt (oblique mirror symmetries genuinely occur)
    let rotation_tangent = if pattern.n() != pattern.m()
        || !oblique
        || f.orthogonal().kind() == OrthogonalKind::Reflection
    {
        RuleOutcome::NotApplicable
    } else {
        const SEPARATION_DEPTH: u32 = 3;
        if pattern.ssc_verified_to_depth(SEPARATION_DEPTH)? {
            separation_depth = Some(SEPARATION_DEPTH);
            let (a, b) = f.orthogonal().unit_pair();
            if a.abs() == b.abs() {
                RuleOutcome::Passes
            } else {
                RuleOutcome::RuledOut
            }
        } else {
            RuleOutcome::NotApplicable
        }
    };

    Ok(PrefilterReport {
        oblique_affine,
        scale_commensurability,
        rotation_tangent,
        separation_depth,
    })
}
