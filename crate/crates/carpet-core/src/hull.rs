//! Convex hull of a square-subdivision carpet and the exact angle arithmetic
//! on it: interior angles as rational (dot, cross) pairs, angle-class sums
//! over vertex runs, the rational-tangent admissibility filter, and points of
//! the carpet marching along a hull edge into a vertex.
//!
//! Angles are never floats. An angle class is the ray of a rational point
//! (dot, cross) ≠ (0, 0); addition of angles is complex multiplication of the
//! pairs, and questions like "is this angle a multiple of π/4" become sign
//! and equality tests on exact rationals.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{CarpetError, Result};
use crate::pattern::CarpetPattern;
use crate::similitude::Point;

// ---------------------------------------------------------------------------
// AngleRep
// ---------------------------------------------------------------------------

/// An exact angle class: the ray through (dot, cross) ∈ ℚ² ∖ {0}. Equal rays
/// (positive rational multiples) are the same angle mod 2π; the tangent is
/// cross/dot when dot ≠ 0 and ∞ otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleRep {
    dot: BigRational,
    cross: BigRational,
}

impl AngleRep {
    pub fn new(dot: BigRational, cross: BigRational) -> Result<Self> {
        if dot.is_zero() && cross.is_zero() {
            return Err(CarpetError::Domain("angle representative must be non-zero".into()));
        }
        Ok(AngleRep { dot, cross })
    }

    pub fn dot(&self) -> &BigRational {
        &self.dot
    }

    pub fn cross(&self) -> &BigRational {
        &self.cross
    }

    /// cross/dot as an exact rational; None encodes a vertical direction
    /// (tangent ∞).
    pub fn tangent(&self) -> Option<BigRational> {
        if self.dot.is_zero() {
            None
        } else {
            Some(&self.cross / &self.dot)
        }
    }

    /// Angle addition: complex multiplication of (dot + i·cross) pairs.
    pub fn add(&self, other: &Self) -> Self {
        AngleRep {
            dot: &self.dot * &other.dot - &self.cross * &other.cross,
            cross: &self.dot * &other.cross + &self.cross * &other.dot,
        }
    }

    /// The class of the negated angle.
    pub fn conjugate(&self) -> Self {
        AngleRep { dot: self.dot.clone(), cross: -self.cross.clone() }
    }

    /// Canonical primitive integer pair generating the same ray: clears
    /// denominators and divides by the gcd, preserving both signs (so θ and
    /// θ + π stay distinct).
    pub fn canonical_pair(&self) -> (BigInt, BigInt) {
        let scale = self.dot.denom().lcm(self.cross.denom());
        let a = (&self.dot * BigRational::from(scale.clone())).to_integer();
        let b = (&self.cross * BigRational::from(scale)).to_integer();
        let g = a.gcd(&b);
        debug_assert!(!g.is_zero());
        (a / &g, b / &g)
    }

    /// Same angle class mod 2π: equal canonical pairs.
    pub fn same_class(&self, other: &Self) -> bool {
        self.canonical_pair() == other.canonical_pair()
    }
}

impl std::fmt::Display for AngleRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.canonical_pair();
        write!(f, "({a}, {b})")
    }
}

/// Verdict of the rational-tangent rotation filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NivenVerdict {
    /// |tan θ| = 1: the only oblique angles compatible with both a rational
    /// tangent and finite rotational order.
    Admissible,
    /// Rational tangent outside {0, ±1}: such an angle is never a rational
    /// multiple of π, hence never the angle of a finite-order rotation.
    ExcludedByNiven,
    /// tan θ ∈ {0, ∞}: an axis-parallel direction, not an oblique rotation.
    AxisParallel,
}

/// Classify an exact angle: axis-parallel, admissible oblique (|tan| = 1),
/// or excluded because a rational tangent other than 0, ±1 cannot occur at a
/// rational multiple of π.
pub fn niven_admissible(theta: &AngleRep) -> NivenVerdict {
    if theta.dot.is_zero() || theta.cross.is_zero() {
        return NivenVerdict::AxisParallel;
    }
    if theta.dot.abs() == theta.cross.abs() {
        NivenVerdict::Admissible
    } else {
        NivenVerdict::ExcludedByNiven
    }
}

// ---------------------------------------------------------------------------
// HullPolygon
// ---------------------------------------------------------------------------

/// The convex hull of a square-pattern carpet: a strictly convex polygon
/// whose vertices are cylinder fixed points, in counterclockwise order
/// starting from the lexicographically least vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullPolygon {
    vertices: Vec<Point>,
    source_digits: Vec<(u32, u32)>,
}

impl HullPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// The pattern digit whose cylinder fixed point is each vertex.
    pub fn source_digits(&self) -> &[(u32, u32)] {
        &self.source_digits
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edge ℓ_t from v_t to v_{t+1} (cyclic), 1-based t.
    pub fn edge(&self, t: usize) -> Result<(&Point, &Point)> {
        let p = self.vertices.len();
        if t < 1 || t > p {
            return Err(CarpetError::Precondition(format!(
                "edge index {t} outside 1..={p}"
            )));
        }
        Ok((&self.vertices[t - 1], &self.vertices[t % p]))
    }

    /// Closed-hull membership by exact half-plane tests.
    pub fn contains_point(&self, p: &Point) -> bool {
        let k = self.vertices.len();
        (0..k).all(|t| {
            let a = &self.vertices[t];
            let b = &self.vertices[(t + 1) % k];
            // (b − a) × (p − a) ≥ 0 for CCW polygons
            let cr = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            !cr.is_negative()
        })
    }
}

fn cross3(o: &Point, a: &Point, b: &Point) -> BigRational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Convex hull of the cylinder fixed points, which for square patterns is
/// exactly the hull of the carpet: the fixed points lie in the carpet, and
/// every extreme point of the carpet is a cylinder fixed point.
pub fn convex_hull(pattern: &CarpetPattern) -> Result<HullPolygon> {
    if pattern.n() != pattern.m() {
        return Err(CarpetError::Precondition(
            "hull construction requires a square subdivision (n = m)".into(),
        ));
    }
    if pattern.classify()?.line_supported {
        return Err(CarpetError::DegenerateHull(
            "all cylinder fixed points are collinear".into(),
        ));
    }
    let mut by_point: BTreeMap<Point, (u32, u32)> = BTreeMap::new();
    for &d in pattern.digits() {
        let fp = pattern.cylinder_fixed_point(d)?;
        by_point.insert(fp, d);
    }
    // Monotone chain over the lexicographically sorted points. Non-left
    // turns are popped, so collinear midpoints never become vertices.
    let pts: Vec<Point> = by_point.keys().cloned().collect();
    let build = |iter: &mut dyn Iterator<Item = &Point>| -> Vec<Point> {
        let mut chain: Vec<Point> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && !cross3(&chain[chain.len() - 2], &chain[chain.len() - 1], p).is_positive()
            {
                chain.pop();
            }
            chain.push(p.clone());
        }
        chain
    };
    let mut vertices = build(&mut pts.iter());
    let mut upper = build(&mut pts.iter().rev());
    // each chain ends where the other begins; drop the duplicates
    vertices.pop();
    upper.pop();
    vertices.extend(upper);
    let source_digits = vertices
        .iter()
        .map(|v| *by_point.get(v).expect("hull vertex is a fixed point"))
        .collect();
    Ok(HullPolygon { vertices, source_digits })
}

/// Interior angle at every vertex as an exact (dot, cross) pair built from
/// the edge vectors u = v_{t−1} − v_t and w = v_{t+1} − v_t: dot = u·w and
/// cross = w × u, positive for a counterclockwise convex polygon. Every
/// tangent is rational or the angle is exactly π/2.
pub fn interior_angles(hull: &HullPolygon) -> Vec<AngleRep> {
    let vs = hull.vertices();
    let p = vs.len();
    (0..p)
        .map(|t| {
            let prev = &vs[(t + p - 1) % p];
            let curr = &vs[t];
            let next = &vs[(t + 1) % p];
            let u = (&prev.0 - &curr.0, &prev.1 - &curr.1);
            let w = (&next.0 - &curr.0, &next.1 - &curr.1);
            let dot = &u.0 * &w.0 + &u.1 * &w.1;
            let cross = &w.0 * &u.1 - &w.1 * &u.0;
            debug_assert!(cross.is_positive(), "convex CCW polygon has angles in (0, π)");
            AngleRep { dot, cross }
        })
        .collect()
}

/// All exact angle classes Σ_{t ∈ run} (π − α_t) mod 2π over every cyclic
/// run of consecutive vertices, in both traversal orientations (a reversed
/// run contributes the negated class). Deduplicated by canonical ray pairs
/// and returned in their sorted order.
pub fn angle_sums(hull: &HullPolygon) -> Vec<AngleRep> {
    let angles = interior_angles(hull);
    let p = angles.len();
    // π − α has the class of (−dot, cross)
    let factors: Vec<AngleRep> = angles
        .iter()
        .map(|a| AngleRep { dot: -a.dot.clone(), cross: a.cross.clone() })
        .collect();
    let mut classes: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for start in 0..p {
        let mut acc: Option<AngleRep> = None;
        for len in 1..=p {
            let f = &factors[(start + len - 1) % p];
            let next = match &acc {
                None => f.clone(),
                Some(a) => a.add(f),
            };
            classes.insert(next.canonical_pair());
            classes.insert(next.conjugate().canonical_pair());
            acc = Some(next);
        }
    }
    classes
        .into_iter()
        .map(|(a, b)| AngleRep { dot: BigRational::from(a), cross: BigRational::from(b) })
        .collect()
}

/// Points of the carpet on edge ℓ_t converging to v_t: the iterates
/// φ_d^r(v_{t+1}) of the vertex's own cylinder map applied to the next
/// vertex, for r = 1..=count. Each point is returned with an exact
/// membership check; the distance to v_t contracts by exactly 1/n per step.
pub fn limit_points_on_edge(
    pattern: &CarpetPattern,
    hull: &HullPolygon,
    t: usize,
    count: u32,
) -> Result<Vec<Point>> {
    let (v_t, v_next) = hull.edge(t)?;
    let digit = hull.source_digits()[t - 1];
    let map = pattern.cylinder_map(digit)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut x = v_next.clone();
    for _ in 0..count {
        x = map.apply(&x)?;
        if !pattern.contains_point(&x.0, &x.1)? {
            return Err(CarpetError::Domain(format!(
                "iterate ({}, {}) failed the membership check",
                x.0, x.1
            )));
        }
        if !cross3(v_t, v_next, &x).is_zero() {
            return Err(CarpetError::Domain(
                "iterate left the edge line; the pattern is not square".into(),
            ));
        }
        out.push(x.clone());
    }
    Ok(out)
}
