//! Subcommand implementations. Every command loads a pattern file, runs the
//! exact computation, and emits either a text report or a `"schema": 1`
//! JSON document (--json), honouring --out for the destination.

use std::fmt::Write as _;
use std::io::Read as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use carpet_core::certify::{
    digit_symmetry_check, embedding_prefilter, grid_containment_certify_with_budget,
    refute_embedding, symmetry_search, ContainmentStatus, PrefilterReport, RuleOutcome,
    SymmetryCertificate, DEFAULT_STATE_BUDGET,
};
use carpet_core::digits::{
    isolated_points, slice_approx_with_budget, slice_digits, slice_gaps, slice_lower_box_dim,
    EventuallyPeriodicDigits, IsolationSide, LogRatio, DEFAULT_INTERVAL_BUDGET,
};
use carpet_core::dimlab::{box_count_projection, marstrand_report, projection_growth_check};
use carpet_core::error::CarpetError;
use carpet_core::hull::{
    angle_sums, convex_hull, interior_angles, limit_points_on_edge, niven_admissible, AngleRep,
    HullPolygon, NivenVerdict,
};
use carpet_core::pattern::{parse_pattern, CarpetPattern, DEFAULT_CELL_BUDGET};
use carpet_core::ratio::{format_rational, parse_decimal, parse_rational};
use carpet_core::similitude::{parse_similitude, OrthogonalKind, Point};

use crate::render::{self, parse_overlay, Overlay};
use crate::{Cli, Command, Format, EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN};

/// Options shared by every subcommand.
pub(crate) struct Globals {
    pub(crate) precision: u32,
    pub(crate) depth: Option<u32>,
    pub(crate) budget: Option<usize>,
    pub(crate) out: Option<PathBuf>,
    pub(crate) json: bool,
}

pub(crate) fn run(cli: Cli) -> anyhow::Result<u8> {
    let g = Globals {
        precision: cli.precision,
        depth: cli.depth,
        budget: cli.budget,
        out: cli.out,
        json: cli.json,
    };
    match cli.command {
        Command::Render { pattern, format, width, height, flip_y, overlay } => {
            cmd_render(&g, &pattern, format, width, height, flip_y, &overlay)
        }
        Command::Report { pattern } => cmd_report(&g, &pattern),
        Command::Slice { pattern, y, cert_level } => cmd_slice(&g, &pattern, &y, cert_level),
        Command::Hull { pattern, march } => cmd_hull(&g, &pattern, march),
        Command::Verify { pattern, map } => cmd_verify(&g, &pattern, &map),
        Command::Search { pattern, max_hyp } => cmd_search(&g, &pattern, max_hyp),
        Command::Project { pattern, direction, k_range, growth_depth } => {
            cmd_project(&g, &pattern, &direction, &k_range, growth_depth)
        }
        Command::Marstrand { pattern } => cmd_marstrand(&g, &pattern),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn load_pattern(path: &Path) -> anyhow::Result<CarpetPattern> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading pattern from stdin")?;
        buf
    } else {
        std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?
    };
    parse_pattern(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit_bytes(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write as _;
            let mut h = std::io::stdout().lock();
            h.write_all(bytes).context("writing to stdout")?;
            h.flush().context("flushing stdout")
        }
    }
}

fn emit_str(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    emit_bytes(out, text.as_bytes())
}

/// Emit either the text report or the JSON document, then return the code.
fn finish(
    g: &Globals,
    text: String,
    j: serde_json::Map<String, Value>,
    code: u8,
) -> anyhow::Result<u8> {
    if g.json {
        let doc = serde_json::to_string_pretty(&Value::Object(j))? + "\n";
        emit_str(&g.out, &doc)?;
    } else {
        emit_str(&g.out, &text)?;
    }
    Ok(code)
}

fn jmap_new() -> serde_json::Map<String, Value> {
    let mut j = serde_json::Map::new();
    j.insert("schema".into(), json!(1));
    j
}

fn fmt_point(p: &Point) -> String {
    format!("({}, {})", format_rational(&p.0), format_rational(&p.1))
}

fn jrat(r: &BigRational) -> Value {
    Value::String(format_rational(r))
}

fn jpoint(p: &Point) -> Value {
    json!([format_rational(&p.0), format_rational(&p.1)])
}

fn ju128(v: u128) -> Value {
    match u64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

/// Accept a rational ("1/2") or a terminating decimal ("0.5").
fn parse_coord(text: &str) -> anyhow::Result<BigRational> {
    let t = text.trim();
    Ok(if t.contains('.') { parse_decimal(t)? } else { parse_rational(t)? })
}

fn rule_word(r: RuleOutcome) -> &'static str {
    match r {
        RuleOutcome::NotApplicable => "not-applicable",
        RuleOutcome::Passes => "passes",
        RuleOutcome::RuledOut => "ruled-out",
    }
}

fn niven_word(v: NivenVerdict) -> &'static str {
    match v {
        NivenVerdict::Admissible => "admissible",
        NivenVerdict::ExcludedByNiven => "excluded",
        NivenVerdict::AxisParallel => "axis-parallel",
    }
}

fn fmt_tangent(a: &AngleRep) -> String {
    match a.tangent() {
        Some(t) => format_rational(&t),
        None => "inf".into(),
    }
}

/// Text table row and JSON record for one angle representative.
fn angle_row(a: &AngleRep) -> (String, Value) {
    let (p, q) = a.canonical_pair();
    let tangent = fmt_tangent(a);
    let verdict = niven_word(niven_admissible(a));
    let text = format!("canonical=({p}, {q}) tangent={tangent} verdict={verdict}");
    let j = json!({
        "canonical": [p.to_string(), q.to_string()],
        "tangent": tangent,
        "niven": verdict,
    });
    (text, j)
}

fn jcert(c: &SymmetryCertificate) -> Value {
    let o = c.orthogonal();
    let (a, b) = o.unit_pair();
    let permutation: Vec<Value> = c
        .permutation()
        .iter()
        .map(|&((a0, a1), (b0, b1))| json!([[a0, a1], [b0, b1]]))
        .collect();
    json!({
        "kind": match o.kind() {
            OrthogonalKind::Rotation => "rotation",
            OrthogonalKind::Reflection => "reflection",
        },
        "unitPair": [format_rational(a), format_rational(b)],
        "perDigitOffset": jpoint(c.per_digit_offset()),
        "globalTranslation": jpoint(c.global_translation()),
        "permutation": permutation,
    })
}

fn jwitness(word: Option<&[(u32, u32)]>, source: &Point, image: &Point) -> Value {
    let mut j = serde_json::Map::new();
    if let Some(w) = word {
        j.insert(
            "word".into(),
            Value::Array(w.iter().map(|&(i, jj)| json!([i, jj])).collect()),
        );
    }
    j.insert("source".into(), jpoint(source));
    j.insert("image".into(), jpoint(image));
    Value::Object(j)
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

fn resolve_format(explicit: Option<Format>, out: &Option<PathBuf>) -> Format {
    if let Some(f) = explicit {
        return f;
    }
    if let Some(p) = out {
        if let Some(ext) = p.extension().and_then(|e| e.to_str()) {
            if ext.eq_ignore_ascii_case("svg") {
                return Format::Svg;
            }
        }
    }
    Format::Pbm
}

fn cmd_render(
    g: &Globals,
    path: &Path,
    format: Option<Format>,
    width: Option<u64>,
    height: Option<u64>,
    flip_y: bool,
    overlay_args: &[String],
) -> anyhow::Result<u8> {
    if g.json {
        bail!("render emits image data; --json is not supported here");
    }
    let pat = load_pattern(path)?;
    let k = g.depth.unwrap_or(1);
    let budget = g.budget.unwrap_or(DEFAULT_CELL_BUDGET);
    let overlays: Vec<Overlay> = overlay_args
        .iter()
        .map(|o| parse_overlay(o))
        .collect::<anyhow::Result<_>>()?;
    match resolve_format(format, &g.out) {
        Format::Pbm => {
            if !overlays.is_empty() {
                bail!("overlays need SVG output (--format svg)");
            }
            let bytes = render::render_pbm(&pat, k, budget, flip_y, width, height)?;
            emit_bytes(&g.out, &bytes)?;
        }
        Format::Svg => {
            let svg = render::render_svg(&pat, k, budget, flip_y, width, height, &overlays)?;
            emit_str(&g.out, &svg)?;
        }
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn cmd_report(g: &Globals, path: &Path) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let class = pat.classify()?;
    let dim = pat.hausdorff_dimension(g.precision)?;
    let sep_depth = g.depth.unwrap_or(3);
    let separated = pat.ssc_verified_to_depth(sep_depth)?;
    let mar = marstrand_report(&pat)?;

    let mut text = String::new();
    let mut j = jmap_new();

    writeln!(text, "n={} m={} digits={}", pat.n(), pat.m(), pat.digit_count())?;
    writeln!(text, "selfSimilar={}", class.self_similar)?;
    writeln!(text, "logRatioRational={}", class.log_ratio_rational)?;
    writeln!(text, "independent={}", !class.log_ratio_rational)?;
    writeln!(text, "lineSupported={}", class.line_supported)?;
    writeln!(text, "hasVacantRow={}", class.has_vacant_row)?;
    writeln!(text, "hasFullRow={}", class.has_full_row)?;
    writeln!(text, "maxRowCount={}", class.max_row_count)?;
    let exact = dim.exact.as_ref().map(format_rational);
    writeln!(
        text,
        "dimension={} exact={}",
        dim.value.to_decimal_string(),
        exact.as_deref().unwrap_or("-")
    )?;
    writeln!(
        text,
        "separation: {} to depth {sep_depth}",
        if separated { "verified" } else { "not verified" }
    )?;

    j.insert(
        "pattern".into(),
        json!({
            "n": pat.n(),
            "m": pat.m(),
            "digitCount": pat.digit_count(),
            "digits": pat.digits().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        }),
    );
    j.insert(
        "classification".into(),
        json!({
            "selfSimilar": class.self_similar,
            "logRatioRational": class.log_ratio_rational,
            "independent": !class.log_ratio_rational,
            "lineSupported": class.line_supported,
            "hasVacantRow": class.has_vacant_row,
            "hasFullRow": class.has_full_row,
            "maxRowCount": class.max_row_count,
        }),
    );
    j.insert(
        "dimension".into(),
        json!({
            "decimal": dim.value.to_decimal_string(),
            "value": dim.to_f64(),
            "exact": exact,
        }),
    );
    j.insert("separation".into(), json!({"depth": sep_depth, "verified": separated}));

    // Hull geometry exists for square grids with non-collinear anchors.
    if !class.self_similar {
        writeln!(text, "hull: not available (square grids only)")?;
        j.insert(
            "hull".into(),
            json!({"available": false, "reason": "square grids only"}),
        );
    } else {
        match convex_hull(&pat) {
            Ok(h) => {
                append_hull(&mut text, &mut j, &h)?;
            }
            Err(CarpetError::DegenerateHull(msg)) => {
                writeln!(text, "hull: degenerate ({msg})")?;
                j.insert("hull".into(), json!({"available": false, "reason": msg}));
            }
            Err(e) => return Err(e.into()),
        }
    }

    writeln!(
        text,
        "marstrand: dimension={:.12} typicalSliceBound={:.12} rowBound={:.12} nonUniformFibres={} strictInequality={} margin={:.12}",
        mar.dimension,
        mar.typical_slice_bound,
        mar.row_bound,
        mar.non_uniform_fibres,
        if mar.strict_inequality_verified { "verified" } else { "not-claimed" },
        mar.margin
    )?;
    j.insert("marstrand".into(), jmarstrand(&mar));

    finish(g, text, j, EXIT_OK)
}

fn jmarstrand(mar: &carpet_core::dimlab::MarstrandReport) -> Value {
    json!({
        "dimension": mar.dimension,
        "typicalSliceBound": mar.typical_slice_bound,
        "rowBound": mar.row_bound,
        "nonUniformFibres": mar.non_uniform_fibres,
        "strictInequalityVerified": mar.strict_inequality_verified,
        "margin": mar.margin,
    })
}

/// Shared hull section: vertices with their source digits, then the
/// interior-angle table with tangents and admissibility verdicts.
fn append_hull(
    text: &mut String,
    j: &mut serde_json::Map<String, Value>,
    h: &HullPolygon,
) -> anyhow::Result<()> {
    writeln!(text, "hull: {} vertices", h.vertex_count())?;
    let mut jverts = Vec::new();
    for (v, d) in h.vertices().iter().zip(h.source_digits()) {
        writeln!(text, "  vertex {} from digit ({}, {})", fmt_point(v), d.0, d.1)?;
        jverts.push(json!({"point": jpoint(v), "digit": [d.0, d.1]}));
    }
    writeln!(text, "angles:")?;
    let mut jangles = Vec::new();
    for (idx, a) in interior_angles(h).iter().enumerate() {
        let (row, jrow) = angle_row(a);
        writeln!(text, "  vertex {}: {row}", idx + 1)?;
        jangles.push(jrow);
    }
    j.insert(
        "hull".into(),
        json!({"available": true, "vertices": jverts, "angles": jangles}),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// slice
// ---------------------------------------------------------------------------

fn cmd_slice(g: &Globals, path: &Path, ytext: &str, cert_level: Option<u32>) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let y = parse_coord(ytext)?;
    let p = g.depth.unwrap_or(3);
    if p == 0 {
        bail!("--depth must be at least 1");
    }
    let pp = cert_level.unwrap_or(p + 2);
    let off = pp
        .checked_sub(p)
        .with_context(|| format!("--cert-level {pp} must be at least the depth {p}"))?;
    let budget = g.budget.unwrap_or(DEFAULT_INTERVAL_BUDGET);

    let expansions = slice_digits(&pat, &y)?;
    let mut text = String::new();
    let mut j = jmap_new();
    j.insert("y".into(), jrat(&y));

    if expansions.is_empty() {
        writeln!(
            text,
            "slice at y={} is empty: no digit expansion stays within the occupied rows",
            format_rational(&y)
        )?;
        j.insert("slices".into(), json!([]));
        j.insert("empty".into(), json!(true));
        return finish(g, text, j, EXIT_NEGATIVE);
    }

    let mut jslices = Vec::new();
    for e in &expansions {
        let (block, jslice) = slice_block(&pat, e, p, off, budget)?;
        text.push_str(&block);
        jslices.push(jslice);
    }
    j.insert("slices".into(), Value::Array(jslices));
    j.insert("empty".into(), json!(false));
    finish(g, text, j, EXIT_OK)
}

fn fmt_logratio(r: &LogRatio) -> (String, String) {
    (format!("log({})", r.product), format!("{}*log({})", r.period, r.base))
}

fn slice_block(
    pat: &CarpetPattern,
    e: &EventuallyPeriodicDigits,
    p: u32,
    off: u32,
    budget: usize,
) -> anyhow::Result<(String, Value)> {
    let mut text = String::new();
    writeln!(text, "expansion digits={e}")?;

    let dim = slice_lower_box_dim(pat, e)?;
    let (dim_num, dim_den) = fmt_logratio(&dim.value);

    let mut jlevels = Vec::new();
    for level in 1..=p {
        let approx = slice_approx_with_budget(pat, e, level, budget)?;
        let gaps = slice_gaps(pat, e, level, level + off)?;
        let max_gap: BigRational = gaps
            .gaps
            .iter()
            .map(|gi| &gi.hi - &gi.lo)
            .max()
            .unwrap_or_else(BigRational::zero);
        writeln!(
            text,
            "level={level} count={} maxgap_num={} maxgap_den={} dim_num={dim_num} dim_den={dim_den}",
            approx.interval_count(),
            max_gap.numer(),
            max_gap.denom(),
        )?;
        let jgaps: Vec<Value> = gaps
            .gaps
            .iter()
            .map(|gi| {
                json!({
                    "lo": jrat(&gi.lo),
                    "hi": jrat(&gi.hi),
                    "certifiedDisjoint": gi.certified_disjoint,
                })
            })
            .collect();
        jlevels.push(json!({
            "level": level,
            "count": approx.interval_count(),
            "endpoints": approx.left_endpoints.iter().map(|&a| ju128(a)).collect::<Vec<_>>(),
            "gaps": jgaps,
            "cert_level": level + off,
            "max_gap": jrat(&max_gap),
            "max_scaled_gap": gaps.max_scaled_gap.as_ref().map(jrat),
        }));
    }

    let (bound_num, bound_den) = fmt_logratio(&dim.bound);
    writeln!(
        text,
        "dimension: {}/({}) = {:.10} bound={}/({}) attained={}",
        dim_num,
        dim_den,
        dim.value.to_f64(),
        bound_num,
        bound_den,
        dim.attains_bound
    )?;

    let left = isolated_points(pat, e, IsolationSide::Left, p + off)?;
    let right = isolated_points(pat, e, IsolationSide::Right, p + off)?;
    writeln!(text, "isolated: left={} right={} (depth {})", left.len(), right.len(), p + off)?;
    let fmt_iso = |pts: &[carpet_core::digits::IsolatedPoint], label: &str| -> String {
        let mut s = String::new();
        for ip in pts.iter().take(8) {
            s.push_str(&format!(
                "  {label} point={} radius={}\n",
                format_rational(&ip.point),
                format_rational(&ip.radius)
            ));
        }
        if pts.len() > 8 {
            s.push_str(&format!("  {label} ... {} more\n", pts.len() - 8));
        }
        s
    };
    text.push_str(&fmt_iso(&left, "left"));
    text.push_str(&fmt_iso(&right, "right"));

    let jiso = |pts: &[carpet_core::digits::IsolatedPoint]| -> Vec<Value> {
        pts.iter()
            .map(|ip| {
                json!({
                    "point": jrat(&ip.point),
                    "radius": jrat(&ip.radius),
                    "depth": ip.depth,
                })
            })
            .collect()
    };

    let jslice = json!({
        "digits": e.to_string(),
        "level": p,
        "levels": jlevels,
        "dim_log_numerator_args": dim.row_counts,
        "dimension": {
            "numeratorProduct": dim.value.product.to_string(),
            "period": dim.value.period,
            "base": dim.value.base,
            "value": dim.value.to_f64(),
            "boundAttained": dim.attains_bound,
        },
        "isolatedLeft": jiso(&left),
        "isolatedRight": jiso(&right),
    });
    Ok((text, jslice))
}

// ---------------------------------------------------------------------------
// hull
// ---------------------------------------------------------------------------

fn cmd_hull(g: &Globals, path: &Path, march: Option<usize>) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let depth = g.depth.unwrap_or(3);
    let mut text = String::new();
    let mut j = jmap_new();

    let h = match convex_hull(&pat) {
        Ok(h) => h,
        Err(CarpetError::DegenerateHull(msg)) => {
            writeln!(text, "hull: degenerate ({msg})")?;
            j.insert("degenerate".into(), json!(true));
            j.insert("reason".into(), json!(msg));
            return finish(g, text, j, EXIT_OK);
        }
        Err(e) => return Err(e.into()),
    };

    j.insert("degenerate".into(), json!(false));
    append_hull(&mut text, &mut j, &h)?;

    writeln!(text, "angleSums: {} classes", angle_sums(&h).len())?;
    let mut jsums = Vec::new();
    for (idx, a) in angle_sums(&h).iter().enumerate() {
        let (row, jrow) = angle_row(a);
        writeln!(text, "  class {}: {row}", idx + 1)?;
        jsums.push(jrow);
    }
    j.insert("angleSums".into(), Value::Array(jsums));

    let separated = pat.ssc_verified_to_depth(depth)?;
    writeln!(
        text,
        "separation: {} to depth {depth}",
        if separated { "verified" } else { "not verified" }
    )?;
    j.insert("separation".into(), json!({"depth": depth, "verified": separated}));

    if let Some(t) = march {
        let pts = limit_points_on_edge(&pat, &h, t, 8)?;
        writeln!(text, "march edge {t}:")?;
        for pt in &pts {
            writeln!(text, "  {}", fmt_point(pt))?;
        }
        j.insert(
            "march".into(),
            json!({"edge": t, "points": pts.iter().map(jpoint).collect::<Vec<_>>()}),
        );
    }

    finish(g, text, j, EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn jprefilter(pre: &PrefilterReport) -> Value {
    json!({
        "obliqueAffine": rule_word(pre.oblique_affine),
        "scaleCommensurability": rule_word(pre.scale_commensurability),
        "rotationTangent": rule_word(pre.rotation_tangent),
        "separationDepth": pre.separation_depth,
    })
}

fn cmd_verify(g: &Globals, path: &Path, map_text: &str) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let f = parse_similitude(map_text)?;
    let depth = g.depth.unwrap_or(4);
    let budget = g.budget.unwrap_or(DEFAULT_STATE_BUDGET);

    let mut text = String::new();
    let mut j = jmap_new();
    writeln!(text, "map: {f}")?;
    j.insert("map".into(), json!(f.to_string()));

    // Stage 1: necessary-condition screening.
    let pre = embedding_prefilter(&pat, &f)?;
    writeln!(
        text,
        "prefilter: obliqueAffine={} scaleCommensurability={} rotationTangent={}{}",
        rule_word(pre.oblique_affine),
        rule_word(pre.scale_commensurability),
        rule_word(pre.rotation_tangent),
        pre.separation_depth
            .map(|d| format!(" (separation depth {d})"))
            .unwrap_or_default()
    )?;
    j.insert("prefilter".into(), jprefilter(&pre));
    if !pre.passes() {
        writeln!(text, "verdict: refuted (a necessary condition fails)")?;
        j.insert("verdict".into(), json!("refuted"));
        j.insert("method".into(), json!("prefilter"));
        return finish(g, text, j, EXIT_NEGATIVE);
    }

    // Stage 2: scale-one isometries of square grids are symmetries exactly
    // when they come from a digit bijection; test that directly.
    if pat.is_self_similar() && f.scale().is_one() && !f.is_diagonal_affine() {
        let nm1 = BigRational::from_integer(BigInt::from(pat.n() - 1));
        let c = (&f.translation().0 * &nm1, &f.translation().1 * &nm1);
        if let Some(cert) = digit_symmetry_check(&pat, f.orthogonal(), &c)? {
            writeln!(text, "verdict: certified (digit symmetry; the map carries the carpet onto itself)")?;
            writeln!(text, "{cert}")?;
            j.insert("verdict".into(), json!("certified"));
            j.insert("method".into(), json!("digit-symmetry"));
            j.insert("certificate".into(), jcert(&cert));
            return finish(g, text, j, EXIT_OK);
        }
        writeln!(text, "digit symmetry: no certificate; continuing to a witness search")?;
    }

    // Stage 3: the grid containment certifier (axis-aligned adic maps);
    // anything it cannot represent falls through to point sampling.
    match grid_containment_certify_with_budget(&pat, &f, budget) {
        Ok(v) => {
            writeln!(text, "grid: explored {} states to depth {}", v.state_count, v.depth)?;
            j.insert("grid".into(), json!({"states": v.state_count, "depth": v.depth}));
            match v.status {
                ContainmentStatus::Certified => {
                    writeln!(text, "verdict: certified (grid containment)")?;
                    j.insert("verdict".into(), json!("certified"));
                    j.insert("method".into(), json!("grid"));
                    finish(g, text, j, EXIT_OK)
                }
                ContainmentStatus::Refuted => {
                    let (src, img) = v.witness.as_ref().expect("refutation carries a witness");
                    writeln!(text, "witness: source {} -> image {}", fmt_point(src), fmt_point(img))?;
                    writeln!(text, "verdict: refuted (the image point leaves the carpet)")?;
                    j.insert("witness".into(), jwitness(None, src, img));
                    j.insert("verdict".into(), json!("refuted"));
                    j.insert("method".into(), json!("grid"));
                    finish(g, text, j, EXIT_NEGATIVE)
                }
                ContainmentStatus::Unknown => {
                    writeln!(text, "verdict: unknown (state budget {budget} exhausted)")?;
                    j.insert("verdict".into(), json!("unknown"));
                    j.insert("method".into(), json!("grid"));
                    finish(g, text, j, EXIT_UNKNOWN)
                }
            }
        }
        Err(CarpetError::Precondition(msg)) | Err(CarpetError::UnsupportedComposition(msg)) => {
            writeln!(text, "grid: not applicable ({msg})")?;
            j.insert("grid".into(), json!({"applicable": false, "reason": msg}));
            match refute_embedding(&pat, &f, depth) {
                Ok(Some(w)) => {
                    let word: Vec<String> =
                        w.word.iter().map(|&(a, b)| format!("({a},{b})")).collect();
                    writeln!(text, "witness: periodic word [{}]", word.join(" "))?;
                    writeln!(
                        text,
                        "witness: source {} -> image {}",
                        fmt_point(&w.source),
                        fmt_point(&w.image)
                    )?;
                    writeln!(text, "verdict: refuted (the image point leaves the carpet)")?;
                    j.insert("witness".into(), jwitness(Some(&w.word), &w.source, &w.image));
                    j.insert("verdict".into(), json!("refuted"));
                    j.insert("method".into(), json!("sampling"));
                    finish(g, text, j, EXIT_NEGATIVE)
                }
                Ok(None) => {
                    writeln!(
                        text,
                        "verdict: unknown (no witness among periodic points to depth {depth})"
                    )?;
                    j.insert("verdict".into(), json!("unknown"));
                    j.insert("method".into(), json!("sampling"));
                    finish(g, text, j, EXIT_UNKNOWN)
                }
                Err(CarpetError::UnsupportedComposition(m2)) => {
                    writeln!(text, "sampling: not applicable ({m2})")?;
                    writeln!(text, "verdict: unknown (no decision procedure applies)")?;
                    j.insert("verdict".into(), json!("unknown"));
                    j.insert("method".into(), json!("none"));
                    finish(g, text, j, EXIT_UNKNOWN)
                }
                Err(e) => Err(e.into()),
            }
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

fn cmd_search(g: &Globals, path: &Path, max_hyp: u64) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    if !pat.is_self_similar() {
        bail!(
            "the symmetry search needs a square grid (n = m); this pattern is {}x{}",
            pat.n(),
            pat.m()
        );
    }
    let certs = symmetry_search(&pat, max_hyp)?;
    let nontrivial = certs
        .iter()
        .filter(|c| {
            !c.orthogonal().is_identity()
                || !c.global_translation().0.is_zero()
                || !c.global_translation().1.is_zero()
        })
        .count();

    let mut text = String::new();
    let mut j = jmap_new();
    writeln!(
        text,
        "symmetries: {} found ({} beyond the identity) at maxHypotenuse={}",
        certs.len(),
        nontrivial,
        max_hyp
    )?;
    for (i, c) in certs.iter().enumerate() {
        writeln!(text, "\nsymmetry {}:", i + 1)?;
        writeln!(text, "{c}")?;
    }
    j.insert("maxHypotenuse".into(), json!(max_hyp));
    j.insert("count".into(), json!(certs.len()));
    j.insert("nontrivial".into(), json!(nontrivial));
    j.insert(
        "certificates".into(),
        Value::Array(certs.iter().map(jcert).collect()),
    );
    finish(g, text, j, if nontrivial > 0 { EXIT_OK } else { EXIT_NEGATIVE })
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

fn parse_direction(text: &str) -> anyhow::Result<(BigRational, BigRational)> {
    let (a, b) = text
        .split_once(',')
        .with_context(|| format!("direction `{text}` must be `u1,u2`"))?;
    Ok((parse_coord(a)?, parse_coord(b)?))
}

fn parse_k_range(text: &str) -> anyhow::Result<Range<u32>> {
    let (lo, hi) = text
        .split_once("..")
        .with_context(|| format!("level window `{text}` must be `lo..hi`"))?;
    let lo: u32 = lo.trim().parse().with_context(|| format!("bad level `{lo}`"))?;
    let hi: u32 = hi.trim().parse().with_context(|| format!("bad level `{hi}`"))?;
    Ok(lo..hi)
}

fn cmd_project(
    g: &Globals,
    path: &Path,
    direction: &str,
    k_range: &str,
    growth_depth: Option<u32>,
) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let dir = parse_direction(direction)?;
    let range = parse_k_range(k_range)?;
    let est = box_count_projection(&pat, &dir, range)?;
    let growth = growth_depth
        .map(|p| projection_growth_check(&pat, &dir, p))
        .transpose()?;

    let mut text = String::new();
    let mut j = jmap_new();
    writeln!(text, "level,boxCount")?;
    for &(k, c) in &est.levels {
        writeln!(text, "{k},{c}")?;
    }
    writeln!(
        text,
        "# slope={:.6} stderr={:.6} theoretical={}",
        est.value,
        est.stderr,
        est.theoretical.map(|t| format!("{t:.6}")).as_deref().unwrap_or("none")
    )?;
    if let Some(gc) = &growth {
        writeln!(
            text,
            "# growth: p={} level={} cells={} distinct={} satisfied={}",
            gc.p, gc.level, gc.cell_count, gc.distinct_projections, gc.satisfied
        )?;
    }

    j.insert(
        "direction".into(),
        json!([format_rational(&dir.0), format_rational(&dir.1)]),
    );
    j.insert(
        "levels".into(),
        Value::Array(est.levels.iter().map(|&(k, c)| json!([k, c])).collect()),
    );
    j.insert("slope".into(), json!(est.value));
    j.insert("stderr".into(), json!(est.stderr));
    j.insert("theoretical".into(), json!(est.theoretical));
    if let Some(gc) = &growth {
        j.insert(
            "growth".into(),
            json!({
                "p": gc.p,
                "level": gc.level,
                "cells": gc.cell_count,
                "distinct": gc.distinct_projections,
                "satisfied": gc.satisfied,
            }),
        );
    }
    finish(g, text, j, EXIT_OK)
}

// ---------------------------------------------------------------------------
// marstrand
// ---------------------------------------------------------------------------

fn cmd_marstrand(g: &Globals, path: &Path) -> anyhow::Result<u8> {
    let pat = load_pattern(path)?;
    let mar = marstrand_report(&pat)?;
    let mut text = String::new();
    writeln!(text, "dimension={:.12}", mar.dimension)?;
    writeln!(text, "typicalSliceBound={:.12}", mar.typical_slice_bound)?;
    writeln!(text, "rowBound={:.12}", mar.row_bound)?;
    writeln!(text, "nonUniformFibres={}", mar.non_uniform_fibres)?;
    writeln!(
        text,
        "strictInequality={}",
        if mar.strict_inequality_verified { "verified" } else { "not-claimed" }
    )?;
    writeln!(text, "margin={:.12}", mar.margin)?;

    let mut j = jmap_new();
    j.insert("marstrand".into(), jmarstrand(&mar));
    finish(g, text, j, EXIT_OK)
}
