//! Release acceptance gate.
//!
//! One test per shipping requirement. Every test prints a single
//! `gate NN: PASS — …` line (visible with `--nocapture`) including its
//! runtime, and fails loudly otherwise. Where an exact published anchor
//! value disagrees with what exact arithmetic proves, the test pins the
//! proven value, additionally asserts that the stale anchor is violated,
//! and prints a `note —` line recording the discrepancy.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use carpet_core::bigfloat::ln_u64;
use carpet_core::certify::{refute_embedding, symmetry_search, SymmetryCertificate};
use carpet_core::digits::{slice_approx, slice_gaps, EventuallyPeriodicDigits};
use carpet_core::dimlab::{box_count_projection, marstrand_report, projection_growth_check};
use carpet_core::hull::{convex_hull, interior_angles, niven_admissible, AngleRep, NivenVerdict};
use carpet_core::pattern::CarpetPattern;
use carpet_core::ratio::rat;
use carpet_core::similitude::{log_commensurable, RationalSimilitude, ScaleValue};

type R = BigRational;

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

fn quarter_shift_4x4() -> CarpetPattern {
    CarpetPattern::new(4, 4, [(0, 1), (1, 3), (2, 0), (3, 2)]).unwrap()
}

fn affine_3x2() -> CarpetPattern {
    CarpetPattern::new(3, 2, [(0, 0), (2, 0), (1, 1)]).unwrap()
}

fn full_row_4x2() -> CarpetPattern {
    CarpetPattern::new(4, 2, [(0, 0), (1, 0), (2, 0), (3, 0)]).unwrap()
}

fn triangle_3x3() -> CarpetPattern {
    CarpetPattern::new(3, 3, [(0, 0), (2, 0), (1, 2)]).unwrap()
}

fn ell_2x2() -> CarpetPattern {
    CarpetPattern::new(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap()
}

fn two_rows_4x4() -> CarpetPattern {
    CarpetPattern::new(
        4,
        4,
        (0..4u32).flat_map(|i| [(i, 0), (i, 1)]),
    )
    .unwrap()
}

fn ring_3x3() -> CarpetPattern {
    CarpetPattern::new(
        3,
        3,
        (0..3u32).flat_map(|i| (0..3u32).map(move |j| (i, j))).filter(|&d| d != (1, 1)),
    )
    .unwrap()
}

fn gate_done(id: u32, what: &str, started: Instant, limit: Option<f64>) {
    let secs = started.elapsed().as_secs_f64();
    if let Some(lim) = limit {
        assert!(secs < lim, "gate {id:02} exceeded its {lim}s budget: {secs:.2}s");
    }
    println!("gate {id:02}: PASS — {what} ({secs:.2}s)");
}

// ---------------------------------------------------------------------------
// Test-local membership oracle: brute-force digit-expansion enumeration,
// written independently of the library's membership routine.
// ---------------------------------------------------------------------------

mod oracle {
    use super::*;

    /// One digit stream: preperiodic digits, then a repeating block.
    pub struct Stream {
        pre: Vec<u32>,
        per: Vec<u32>,
    }

    impl Stream {
        fn digit(&self, k: usize) -> u32 {
            if k <= self.pre.len() {
                self.pre[k - 1]
            } else {
                self.per[(k - 1 - self.pre.len()) % self.per.len()]
            }
        }
    }

    /// Every base-b expansion of x ∈ [0, 1]: the long-division stream, plus
    /// the alternate (b−1)-tail form when x is a nonzero b-adic below 1.
    pub fn streams(x: &R, b: u32) -> Vec<Stream> {
        assert!(*x >= R::zero() && *x <= R::one());
        if x.is_one() {
            return vec![Stream { pre: vec![], per: vec![b - 1] }];
        }
        let q = x.denom().clone();
        let mut num = x.numer().clone();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits: Vec<u32> = Vec::new();
        let (pre, per) = loop {
            if let Some(&pos) = seen.get(&num) {
                break (digits[..pos].to_vec(), digits[pos..].to_vec());
            }
            seen.insert(num.clone(), digits.len());
            let scaled = num * b;
            let d = &scaled / &q;
            num = scaled - &d * &q;
            digits.push(d.to_u32().unwrap());
        };
        let mut out = vec![Stream { pre, per }];
        if out[0].per == [0] {
            // …d000… = …(d−1)(b−1)(b−1)… for the last nonzero digit d
            let mut pre = out[0].pre.clone();
            while pre.last() == Some(&0) {
                pre.pop();
            }
            if let Some(last) = pre.last_mut() {
                *last -= 1;
                out.push(Stream { pre, per: vec![b - 1] });
            }
        }
        out
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    /// Some pairing of an x-stream with a y-stream keeps every digit pair
    /// inside the pattern; one joint cycle past both preperiods decides it.
    pub fn member(pat: &CarpetPattern, x: &R, y: &R) -> bool {
        if *x < R::zero() || *x > R::one() || *y < R::zero() || *y > R::one() {
            return false;
        }
        let xs = streams(x, pat.n());
        let ys = streams(y, pat.m());
        xs.iter().any(|sx| {
            ys.iter().any(|sy| {
                let pre = sx.pre.len().max(sy.pre.len());
                let cycle = sx.per.len() / gcd(sx.per.len(), sy.per.len()) * sy.per.len();
                (1..=pre + cycle)
                    .all(|k| pat.digits().contains(&(sx.digit(k), sy.digit(k))))
            })
        })
    }
}

// ---------------------------------------------------------------------------
// Test-local symmetry oracle: exhaustive search over all digit bijections
// for exact affine realizations z ↦ Mz + c with M rational-orthogonal.
// ---------------------------------------------------------------------------

mod affine_oracle {
    use super::*;

    /// Row-major rational 2×2 matrix with a translation column.
    pub type Map = ([R; 4], (R, R));

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for tail in permutations(k - 1) {
            for slot in 0..k {
                let mut perm = tail.clone();
                perm.insert(slot, k - 1);
                out.push(perm);
            }
        }
        out
    }

    fn lcm_u64(a: u64, b: u64) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        a / gcd(a, b) * b
    }

    /// The affine map forced by anchor digit 0 and the two chosen spanning
    /// digits, if the permutation extends to all digits with an orthogonal
    /// linear part within the hypotenuse bound.
    fn realize(digits: &[(i64, i64)], perm: &[usize], max_hyp: u64) -> Option<Map> {
        let k = digits.len();
        let (ax, ay) = digits[0];
        // find two difference vectors that span the plane
        let (i1, i2) = (1..k)
            .flat_map(|i| (1..k).map(move |j| (i, j)))
            .find(|&(i, j)| {
                let u = (digits[i].0 - ax, digits[i].1 - ay);
                let v = (digits[j].0 - ax, digits[j].1 - ay);
                u.0 * v.1 - u.1 * v.0 != 0
            })?;
        let u1 = (digits[i1].0 - ax, digits[i1].1 - ay);
        let u2 = (digits[i2].0 - ax, digits[i2].1 - ay);
        let det = u1.0 * u2.1 - u2.0 * u1.1;
        let img = |i: usize| digits[perm[i]];
        let v1 = (img(i1).0 - img(0).0, img(i1).1 - img(0).1);
        let v2 = (img(i2).0 - img(0).0, img(i2).1 - img(0).1);
        // M = [v1 v2] · [u1 u2]^{-1}
        let entry = |num: i64| rat(num, det);
        let m = [
            entry(v1.0 * u2.1 - v2.0 * u1.1),
            entry(-v1.0 * u2.0 + v2.0 * u1.0),
            entry(v1.1 * u2.1 - v2.1 * u1.1),
            entry(-v1.1 * u2.0 + v2.1 * u1.0),
        ];
        // orthogonality, exactly
        let one = R::one();
        let zero = R::zero();
        if &m[0] * &m[0] + &m[2] * &m[2] != one
            || &m[1] * &m[1] + &m[3] * &m[3] != one
            || &m[0] * &m[1] + &m[2] * &m[3] != zero
        {
            return None;
        }
        let hyp = lcm_u64(
            m[0].denom().to_u64().unwrap(),
            m[2].denom().to_u64().unwrap(),
        );
        if hyp > max_hyp {
            return None;
        }
        let c = (
            rat(img(0).0, 1) - (&m[0] * rat(ax, 1) + &m[1] * rat(ay, 1)),
            rat(img(0).1, 1) - (&m[2] * rat(ax, 1) + &m[3] * rat(ay, 1)),
        );
        // the forced map must realize the whole permutation
        for (i, &(dx, dy)) in digits.iter().enumerate() {
            let fx = &m[0] * rat(dx, 1) + &m[1] * rat(dy, 1) + &c.0;
            let fy = &m[2] * rat(dx, 1) + &m[3] * rat(dy, 1) + &c.1;
            if fx != rat(img(i).0, 1) || fy != rat(img(i).1, 1) {
                return None;
            }
        }
        Some((m, c))
    }

    /// All exact affine symmetries of the digit set with rational-orthogonal
    /// linear part and hypotenuse at most `max_hyp`, one per digit bijection.
    pub fn symmetries(digits: &[(i64, i64)], max_hyp: u64) -> Vec<Map> {
        permutations(digits.len())
            .iter()
            .filter_map(|perm| realize(digits, perm, max_hyp))
            .collect()
    }

    /// Canonical text key for set comparison (Display of reduced rationals).
    pub fn key(m: &Map) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}",
            m.0[0], m.0[1], m.0[2], m.0[3], m.1 .0, m.1 .1
        )
    }
}

fn certificate_key(cert: &SymmetryCertificate) -> String {
    let e1 = (R::one(), R::zero());
    let e2 = (R::zero(), R::one());
    let c1 = cert.orthogonal().apply(&e1);
    let c2 = cert.orthogonal().apply(&e2);
    let off = cert.per_digit_offset();
    format!("{}|{}|{}|{}|{}|{}", c1.0, c2.0, c1.1, c2.1, off.0, off.1)
}

// ---------------------------------------------------------------------------
// Gate 01 — symmetry census of the 4×4 quarter-shift pattern
// ---------------------------------------------------------------------------

#[test]
fn gate_01_symmetry_census() {
    let started = Instant::now();
    let pat = quarter_shift_4x4();
    let found = symmetry_search(&pat, 5).unwrap();
    let found_keys: BTreeSet<String> = found.iter().map(certificate_key).collect();
    assert_eq!(found_keys.len(), found.len(), "duplicate certificates");

    let digits: Vec<(i64, i64)> = pat.digits().iter().map(|&(i, j)| (i as i64, j as i64)).collect();
    let oracle = affine_oracle::symmetries(&digits, 5);
    let oracle_keys: BTreeSet<String> = oracle.iter().map(affine_oracle::key).collect();

    assert_eq!(found_keys, oracle_keys, "search disagrees with the exhaustive oracle");
    assert_eq!(found.len(), 8, "the symmetry group of this pattern has order 8");

    // the four canonical members: identity, half turn, the hypotenuse-5
    // reflection with offset (9/5, 18/5), and its half-turn conjugate
    let k = |vals: [(i64, i64); 6]| {
        let r: Vec<String> = vals.iter().map(|&(p, q)| rat(p, q).to_string()).collect();
        r.join("|")
    };
    for (name, expect) in [
        ("identity", k([(1, 1), (0, 1), (0, 1), (1, 1), (0, 1), (0, 1)])),
        ("half turn", k([(-1, 1), (0, 1), (0, 1), (-1, 1), (3, 1), (3, 1)])),
        ("reflection", k([(3, 5), (-4, 5), (-4, 5), (-3, 5), (9, 5), (18, 5)])),
        ("conjugate reflection", k([(-3, 5), (4, 5), (4, 5), (3, 5), (6, 5), (-3, 5)])),
    ] {
        assert!(found_keys.contains(&expect), "{name} certificate missing");
    }
    assert_ne!(found.len(), 4, "a census of 4 would drop the quarter-turn orbit");
    println!(
        "gate 01: note — the full symmetry group has order 8 (the four \
         axis-aligned rotations plus four hypotenuse-5 reflections); a count \
         of 4 misses the quarter-turn orbit"
    );
    gate_done(1, "symmetry census matches the exhaustive digit-permutation oracle (8 maps)", started, Some(1.0));
}

// ---------------------------------------------------------------------------
// Gate 02 — dimension anchors
// ---------------------------------------------------------------------------

#[test]
fn gate_02_dimension_anchors() {
    let started = Instant::now();

    // single full row: exactly 1
    let d = full_row_4x2().hausdorff_dimension(50).unwrap();
    assert_eq!(d.exact, Some(R::one()));
    assert!((d.to_f64() - 1.0).abs() < 1e-12);

    // self-similar patterns: exactly log(#digits)/log n
    for (pat, num, den) in [
        (quarter_shift_4x4(), 1, 1),
        (triangle_3x3(), 1, 1),
        (two_rows_4x4(), 3, 2),
    ] {
        let d = pat.hausdorff_dimension(50).unwrap();
        assert_eq!(d.exact, Some(rat(num, den)), "exact dimension of a self-similar pattern");
    }
    // …including one with an irrational value: log 3 / log 2
    let d = ell_2x2().hausdorff_dimension(50).unwrap();
    assert!(d.exact.is_none());
    let expect = ln_u64(3, 50).unwrap().div(&ln_u64(2, 50).unwrap(), 50).unwrap();
    assert!(d.value.agrees_to(&expect, 30));

    // the 3×2 anchor: two independent evaluations agree to 1e-30
    let pat = affine_3x2();
    let via_sum = pat.hausdorff_dimension(50).unwrap();
    let via_entropy = pat.hausdorff_dimension_alt(50).unwrap();
    assert!(via_sum.value.agrees_to(&via_entropy, 30), "independent evaluations diverge");
    assert!(via_sum.exact.is_none());
    let f = via_sum.to_f64();
    assert!((f - 1.349_683_820_195_577_6).abs() < 1e-12);
    assert!(
        via_sum
            .value
            .to_decimal_string()
            .starts_with("1.3496838201955775731155390813143199004"),
        "50-digit value drifted: {}",
        via_sum.value.to_decimal_string()
    );
    // the rounded anchor 1.3500 is off by ~3.2e-4 and can never pass at 1e-4
    assert!((f - 1.3500).abs() > 1e-4);
    println!(
        "gate 02: note — the 3×2 dimension is 1.34968382…, which rounds to \
         1.3497; an expected value of 1.3500 at tolerance 1e-4 is \
         unattainable (off by 3.2e-4)"
    );
    gate_done(2, "exact and 50-digit dimension anchors, dual evaluations to 1e-30", started, Some(1.0));
}

// ---------------------------------------------------------------------------
// Gate 03 — membership vs. brute-force expansion enumeration
// ---------------------------------------------------------------------------

#[test]
fn gate_03_membership_oracle_equivalence() {
    let started = Instant::now();
    let patterns = [
        quarter_shift_4x4(),
        affine_3x2(),
        full_row_4x2(),
        triangle_3x3(),
        CarpetPattern::new(5, 3, [(0, 0), (2, 0), (4, 1), (1, 2), (3, 2)]).unwrap(),
    ];
    let mut total = 0u64;
    for pat in &patterns {
        let xden = (pat.n() as i64).pow(4);
        let yden = (pat.m() as i64).pow(4);
        let mismatches: u64 = (0..=xden)
            .into_par_iter()
            .map(|a| {
                let x = rat(a, xden);
                let mut bad = 0u64;
                for b in 0..=yden {
                    let y = rat(b, yden);
                    let lib = pat.contains_point(&x, &y).unwrap();
                    let brute = oracle::member(pat, &x, &y);
                    if lib != brute {
                        eprintln!(
                            "mismatch on {}x{} at ({a}/{xden}, {b}/{yden}): library={lib} oracle={brute}",
                            pat.n(),
                            pat.m()
                        );
                        bad += 1;
                    }
                }
                bad
            })
            .sum();
        assert_eq!(mismatches, 0, "membership disagreement on the {}x{} pattern", pat.n(), pat.m());
        total += (xden as u64 + 1) * (yden as u64 + 1);
    }
    gate_done(
        3,
        &format!("library membership equals expansion enumeration on {total} grid points"),
        started,
        Some(30.0),
    );
}

// ---------------------------------------------------------------------------
// Gate 04 — slice structure suite
// ---------------------------------------------------------------------------

/// Π #I_{y_k} over digit positions lo+1 ..= hi.
fn row_product(pat: &CarpetPattern, e: &EventuallyPeriodicDigits, lo: u32, hi: u32) -> u128 {
    (lo as u64 + 1..=hi as u64)
        .map(|k| pat.row_digits(e.digit(k)).len() as u128)
        .product()
}

#[test]
fn gate_04_slice_structure_suite() {
    let started = Instant::now();
    let p1 = CarpetPattern::new(3, 2, [(0, 0), (2, 0), (0, 1), (1, 1)]).unwrap();
    let p2 = CarpetPattern::new(4, 2, [(0, 0), (3, 0), (1, 1), (2, 1)]).unwrap();
    let p3 = CarpetPattern::new(
        4,
        4,
        [(0, 0), (3, 0), (1, 1), (2, 1), (0, 2), (2, 2), (1, 3), (3, 3)],
    )
    .unwrap();
    let p4 = CarpetPattern::new(
        5,
        3,
        [(0, 0), (2, 0), (4, 0), (1, 1), (3, 1), (0, 2), (4, 2)],
    )
    .unwrap();

    let pairs: Vec<(&CarpetPattern, Vec<u32>)> = vec![
        (&p1, vec![0]),
        (&p1, vec![1]),
        (&p1, vec![0, 1]),
        (&p2, vec![0]),
        (&p2, vec![1]),
        (&p2, vec![1, 0]),
        (&p3, vec![0, 1, 2, 3]),
        (&p3, vec![2]),
        (&p3, vec![3, 1]),
        (&p4, vec![0, 1, 2]),
    ];
    assert_eq!(pairs.len(), 10);

    for (pat, period) in &pairs {
        // the hypothesis: at least two digits in every row the sequence visits
        assert!(period.iter().all(|&j| pat.row_digits(j).len() >= 2));
        let e = EventuallyPeriodicDigits::new(pat.m(), vec![], period.clone()).unwrap();
        for p in [1u32, 3, 5] {
            let pp = p + 3;
            let coarse = slice_approx(pat, &e, p).unwrap();
            let fine = slice_approx(pat, &e, pp).unwrap();

            // interval counts are exact digit products
            assert_eq!(coarse.left_endpoints.len() as u128, row_product(pat, &e, 0, p));
            assert_eq!(fine.left_endpoints.len() as u128, row_product(pat, &e, 0, pp));

            // translation equality: every basic interval carries the same
            // relative endpoint block
            let shift = u128::from(pat.n()).pow(3);
            let mut blocks: BTreeMap<u128, Vec<u128>> = BTreeMap::new();
            for &l in &fine.left_endpoints {
                blocks.entry(l / shift).or_default().push(l % shift);
            }
            assert_eq!(blocks.len(), coarse.left_endpoints.len());
            let first = blocks.values().next().unwrap().clone();
            assert_eq!(first.len() as u128, row_product(pat, &e, p, pp));
            for block in blocks.values() {
                assert_eq!(block, &first, "blocks are not translates");
            }

            // gap bound |G|·n^p ≤ 1 − 2n^{-2} at both certification offsets
            let cap = R::one() - rat(2, (pat.n() as i64).pow(2));
            for off in [2u32, 3] {
                let report = slice_gaps(pat, &e, p, p + off).unwrap();
                if let Some(g) = report.max_scaled_gap {
                    assert!(g <= cap, "gap {g} exceeds {cap}");
                }
            }

            // diameter bound: ≥ 4 sub-intervals two levels down, spread ≥ 3
            let two = slice_approx(pat, &e, p + 2).unwrap();
            let shift2 = u128::from(pat.n()).pow(2);
            let mut spans: BTreeMap<u128, (u128, u128, u32)> = BTreeMap::new();
            for &l in &two.left_endpoints {
                let s = spans.entry(l / shift2).or_insert((l % shift2, l % shift2, 0));
                s.0 = s.0.min(l % shift2);
                s.1 = s.1.max(l % shift2);
                s.2 += 1;
            }
            assert_eq!(spans.len(), coarse.left_endpoints.len());
            for &(lo, hi, count) in spans.values() {
                assert!(count >= 4, "a basic interval holds only {count} sub-intervals");
                assert!(hi - lo >= 3);
            }
        }
    }
    gate_done(4, "count, translation, gap, and diameter checks exact on 10 slice fixtures", started, Some(10.0));
}

// ---------------------------------------------------------------------------
// Gate 05 — hull and angle admissibility
// ---------------------------------------------------------------------------

#[test]
fn gate_05_hull_and_angles() {
    let started = Instant::now();

    let h = convex_hull(&quarter_shift_4x4()).unwrap();
    let got: BTreeSet<String> = h.vertices().iter().map(|v| format!("{},{}", v.0, v.1)).collect();
    let want: BTreeSet<String> = [
        (rat(2, 3), rat(0, 1)),
        (rat(1, 1), rat(2, 3)),
        (rat(1, 3), rat(1, 1)),
        (rat(0, 1), rat(1, 3)),
    ]
    .iter()
    .map(|v| format!("{},{}", v.0, v.1))
    .collect();
    assert_eq!(got, want, "hull vertex set");
    let angles = interior_angles(&h);
    assert_eq!(angles.len(), 4);
    for a in &angles {
        assert!(a.dot().is_zero(), "interior angle is not a right angle");
        assert!(a.tangent().is_none(), "right angles have tangent ∞");
    }

    // every interior angle of every square test hull is exactly
    // representable with tangent in ℚ ∪ {∞}
    for pat in [quarter_shift_4x4(), triangle_3x3(), two_rows_4x4(), ell_2x2(), ring_3x3()] {
        let h = convex_hull(&pat).unwrap();
        assert!(h.vertex_count() >= 3);
        let angles = interior_angles(&h);
        assert_eq!(angles.len(), h.vertex_count());
        for a in &angles {
            // Some(rational) or None (tangent ∞) — both exact by construction
            if let Some(t) = a.tangent() {
                assert!(!t.denom().is_zero());
            }
        }
    }

    // the rational-tangent filter admits only |tan θ| = 1 among oblique angles
    for p in -12i64..=12 {
        for q in 1i64..=12 {
            let verdict = niven_admissible(&AngleRep::new(rat(q, 1), rat(p, 1)).unwrap());
            if p == 0 {
                assert_eq!(verdict, NivenVerdict::AxisParallel);
            } else if p.abs() == q {
                assert_eq!(verdict, NivenVerdict::Admissible);
            } else {
                assert_eq!(verdict, NivenVerdict::ExcludedByNiven, "tan = {p}/{q} wrongly admitted");
            }
        }
    }
    assert_eq!(
        niven_admissible(&AngleRep::new(rat(0, 1), rat(1, 1)).unwrap()),
        NivenVerdict::AxisParallel
    );
    gate_done(5, "hull vertices exact, right angles, tangent filter admits only ±1", started, Some(1.0));
}

// ---------------------------------------------------------------------------
// Gate 06 — certifier soundness
// ---------------------------------------------------------------------------

fn words_of_length(digits: &[(u32, u32)], k: u32) -> Vec<Vec<(u32, u32)>> {
    let mut words: Vec<Vec<(u32, u32)>> = vec![vec![]];
    for _ in 0..k {
        words = words
            .into_iter()
            .flat_map(|w| {
                digits.iter().map(move |&d| {
                    let mut w2 = w.clone();
                    w2.push(d);
                    w2
                })
            })
            .collect();
    }
    words
}

#[test]
fn gate_06_certifier_soundness() {
    let started = Instant::now();
    let pat = quarter_shift_4x4();
    let digits: Vec<(u32, u32)> = pat.digits().iter().copied().collect();
    let certs = symmetry_search(&pat, 5).unwrap();
    assert_eq!(certs.len(), 8);

    let probes = [
        (rat(0, 1), rat(0, 1)),
        (rat(1, 1), rat(0, 1)),
        (rat(0, 1), rat(1, 1)),
    ];

    for cert in &certs {
        let f = cert.to_similitude();
        let sigma: BTreeMap<(u32, u32), (u32, u32)> =
            cert.permutation().iter().copied().collect();
        assert_eq!(sigma.len(), digits.len());

        for k in 1..=4u32 {
            // cell-address action: applying the digit bijection letterwise
            // permutes the level-k cell set
            let cells = pat.cells(k).unwrap();
            let imaged: BTreeSet<(u128, u128)> = cells
                .cells
                .iter()
                .map(|&(a, b)| {
                    let (mut a2, mut b2) = (0u128, 0u128);
                    for pos in (0..k).rev() {
                        let da = (a / u128::from(pat.n()).pow(pos)) % u128::from(pat.n());
                        let db = (b / u128::from(pat.m()).pow(pos)) % u128::from(pat.m());
                        let (ia, ib) = sigma[&(da as u32, db as u32)];
                        a2 = a2 * u128::from(pat.n()) + u128::from(ia);
                        b2 = b2 * u128::from(pat.m()) + u128::from(ib);
                    }
                    (a2, b2)
                })
                .collect();
            assert_eq!(imaged, cells.cells, "digit action does not permute level-{k} cells");
        }

        // exact intertwining: f ∘ φ_w = φ_{σ(w)} ∘ f for every word |w| ≤ 4
        for k in 1..=4u32 {
            for w in words_of_length(&digits, k) {
                let phi = w
                    .iter()
                    .map(|&d| pat.cylinder_map(d).unwrap())
                    .reduce(|acc, g| acc.compose(&g).unwrap())
                    .unwrap();
                let sw: Vec<(u32, u32)> = w.iter().map(|d| sigma[d]).collect();
                let phi_s = sw
                    .iter()
                    .map(|&d| pat.cylinder_map(d).unwrap())
                    .reduce(|acc, g| acc.compose(&g).unwrap())
                    .unwrap();
                let lhs = f.compose(&phi).unwrap();
                let rhs = phi_s.compose(&f).unwrap();
                for p in &probes {
                    assert_eq!(lhs.apply(p).unwrap(), rhs.apply(p).unwrap());
                }
            }
        }
    }

    // the quarter-unit translation admits a sampled counterexample whose
    // status the brute-force expansion oracle confirms on both sides
    let shift = RationalSimilitude::new(
        ScaleValue::one(),
        carpet_core::similitude::RationalOrthogonal::dihedral()[0].clone(),
        (rat(1, 4), rat(0, 1)),
    );
    let witness = refute_embedding(&pat, &shift, 3).unwrap().expect("witness must exist");
    assert!(oracle::member(&pat, &witness.source.0, &witness.source.1));
    assert!(!oracle::member(&pat, &witness.image.0, &witness.image.1));
    gate_done(6, "8 certificates intertwine exactly to depth 4; refutation witness oracle-confirmed", started, Some(5.0));
}

// ---------------------------------------------------------------------------
// Gate 07 — slice bound vs. dimension, strict inequality
// ---------------------------------------------------------------------------

#[test]
fn gate_07_marstrand_margin() {
    let started = Instant::now();
    let patterns = [
        affine_3x2(),
        CarpetPattern::new(4, 2, [(0, 0), (1, 0), (2, 1)]).unwrap(),
        triangle_3x3(),
        CarpetPattern::new(5, 3, [(0, 0), (1, 0), (2, 0), (3, 1), (0, 2)]).unwrap(),
        CarpetPattern::new(4, 4, [(0, 0), (1, 0), (2, 1), (3, 3)]).unwrap(),
    ];
    for pat in &patterns {
        let mar = marstrand_report(pat).unwrap();
        assert!(mar.non_uniform_fibres, "{}x{} fixture must have non-uniform fibres", pat.n(), pat.m());
        assert!(mar.strict_inequality_verified);
        assert!(
            mar.margin > 1e-10,
            "{}x{} margin {} too small",
            pat.n(),
            pat.m(),
            mar.margin
        );
        assert!(mar.typical_slice_bound < mar.row_bound);
    }
    gate_done(7, "dim − 1 < log N / log n with margin > 1e-10 on all 5 non-uniform fixtures", started, Some(1.0));
}

// ---------------------------------------------------------------------------
// Gate 08 — box-counting probes
// ---------------------------------------------------------------------------

#[test]
fn gate_08_projection_probes() {
    let started = Instant::now();

    // three oblique directions on a pattern whose shadow fills an interval:
    // estimated slope within 0.05 of 1
    let ell = ell_2x2();
    for (a, b) in [(1i64, 1i64), (1, 2), (2, 1)] {
        let est = box_count_projection(&ell, &(rat(a, 1), rat(b, 1)), 6..12).unwrap();
        assert!(
            (est.value - 1.0).abs() <= 0.05,
            "direction ({a},{b}): slope {} strays from 1",
            est.value
        );
    }

    // the 3×2 pattern with dimension > 1: diagonal shadow slope within 0.08
    let est = box_count_projection(&affine_3x2(), &(rat(1, 1), rat(1, 1)), 6..12).unwrap();
    assert!((est.value - 1.0).abs() <= 0.08, "slope {}", est.value);
    let theory = est.theoretical.expect("dimension > 1 forces a full-measure shadow");
    assert!((theory - 1.0).abs() < 1e-9);

    // growth check on a one-digit-per-row pattern
    let mono = CarpetPattern::new(3, 2, [(0, 0), (1, 1)]).unwrap();
    for p in 1..=5u32 {
        let g = projection_growth_check(&mono, &(rat(1, 1), rat(1, 1)), p).unwrap();
        assert!(g.satisfied, "growth fails at p = {p}");
        assert!(2 * g.distinct_projections >= g.cell_count);
    }
    gate_done(8, "oblique shadows estimate dimension 1 within tolerance; growth check holds to p=5", started, Some(60.0));
}

// ---------------------------------------------------------------------------
// Gate 09 — logarithmic commensurability table
// ---------------------------------------------------------------------------

#[test]
fn gate_09_commensurability_table() {
    let started = Instant::now();
    let s_rat = |p: i64, q: i64| ScaleValue::from_rational(&rat(p, q)).unwrap();
    let s_int = |v: u64| ScaleValue::from_u64(v).unwrap();
    let s_pow = |pairs: &[(u64, i64, i64)]| {
        let v: Vec<(u64, R)> = pairs.iter().map(|&(b, p, q)| (b, rat(p, q))).collect();
        ScaleValue::from_prime_powers(&v).unwrap()
    };

    // (λ, base, hand-computed exponent or None), 20 rows
    let table: Vec<(ScaleValue, ScaleValue, Option<R>)> = vec![
        (s_rat(1, 4), s_int(4), Some(rat(-1, 1))),
        (s_rat(1, 8), s_int(4), Some(rat(-3, 2))),
        (s_int(16), s_int(4), Some(rat(2, 1))),
        (s_rat(1, 4), s_int(2), Some(rat(-2, 1))),
        (s_int(8), s_int(2), Some(rat(3, 1))),
        (s_rat(1, 6), s_int(6), Some(rat(-1, 1))),
        (s_int(36), s_int(6), Some(rat(2, 1))),
        (s_rat(1, 6), s_int(4), None),
        (s_rat(2, 3), s_int(3), None),
        (s_rat(9, 4), s_int(6), None),
        (s_int(6), s_int(36), Some(rat(1, 2))),
        (s_rat(1, 1), s_int(7), Some(rat(0, 1))),
        (s_int(7), s_int(7), Some(rat(1, 1))),
        (s_rat(1, 49), s_int(7), Some(rat(-2, 1))),
        (s_rat(5, 25), s_int(5), Some(rat(-1, 1))),
        (s_pow(&[(2, 1, 2)]), s_int(2), Some(rat(1, 2))),
        (s_pow(&[(2, -3, 2)]), s_int(4), Some(rat(-3, 4))),
        (s_pow(&[(2, 1, 3), (3, 1, 3)]), s_int(6), Some(rat(1, 3))),
        (s_pow(&[(2, 1, 2), (3, 1, 3)]), s_int(6), None),
        (s_pow(&[(3, 5, 2)]), s_int(9), Some(rat(5, 4))),
    ];
    assert_eq!(table.len(), 20);
    for (idx, (lambda, base, want)) in table.iter().enumerate() {
        let got = log_commensurable(lambda, base).unwrap();
        assert_eq!(&got, want, "row {} of the exponent table", idx + 1);
    }
    gate_done(9, "20-row exponent table matches hand-computed answers exactly", started, Some(1.0));
}

// ---------------------------------------------------------------------------
// Gate 10 — golden rasters
// ---------------------------------------------------------------------------

#[test]
fn gate_10_golden_rasters() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.carpet");
    std::fs::write(&path, "4 4\n0 1\n1 3\n2 0\n3 2\n").unwrap();
    let render = |k: u32| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_carpet"))
            .args(["render", path.to_str().unwrap(), "--depth", &k.to_string()])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    for k in 1..=3u32 {
        let first = render(k);
        let second = render(k);
        assert_eq!(first, second, "level-{k} raster varies between runs");
        let side = 4usize.pow(k);
        let header = format!("P4\n{side} {side}\n");
        assert!(first.starts_with(header.as_bytes()));
        let bits: u32 = first[header.len()..].iter().map(|b| b.count_ones()).sum();
        assert_eq!(bits as usize, 4usize.pow(k), "level-{k} black-pixel count");
    }
    assert_eq!(render(1), b"P4\n4 4\n\x40\x10\x80\x20".to_vec(), "frozen level-1 bytes");
    gate_done(10, "rasters byte-stable across runs, black counts 4^k, level-1 bytes frozen", started, None);
}
