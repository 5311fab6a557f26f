//! Bitmap (binary PBM) and vector (SVG) rasterization of the level-k cell
//! approximation, with optional exact-geometry overlays on the SVG side.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use carpet_core::digits::{slice_approx_with_budget, slice_digits};
use carpet_core::hull::convex_hull;
use carpet_core::pattern::CarpetPattern;
use carpet_core::ratio::{parse_decimal, parse_rational};

/// Hard cap on the PBM pixel payload.
const MAX_PIXEL_BYTES: u64 = 1 << 28;

/// An exact-geometry decoration drawn on top of the SVG cell raster.
pub(crate) enum Overlay {
    /// The convex hull polygon of the carpet.
    Hull,
    /// The level-k intervals of the horizontal slice at this height.
    Slice(BigRational),
    /// A cross marker, e.g. at a refutation witness image.
    Witness(BigRational, BigRational),
}

/// Accept a rational ("2/3") or a terminating decimal ("0.75").
fn parse_coord(text: &str) -> anyhow::Result<BigRational> {
    let t = text.trim();
    Ok(if t.contains('.') { parse_decimal(t)? } else { parse_rational(t)? })
}

pub(crate) fn parse_overlay(text: &str) -> anyhow::Result<Overlay> {
    if text == "hull" {
        return Ok(Overlay::Hull);
    }
    if let Some(rest) = text.strip_prefix("slice=") {
        return Ok(Overlay::Slice(parse_coord(rest)?));
    }
    if let Some(rest) = text.strip_prefix("witness=") {
        let (x, y) = rest
            .split_once(',')
            .with_context(|| format!("overlay `witness={rest}` needs `<x>,<y>`"))?;
        return Ok(Overlay::Witness(parse_coord(x)?, parse_coord(y)?));
    }
    bail!("unknown overlay `{text}` (expected hull, slice=<y>, or witness=<x>,<y>)");
}

/// Grid side n^k (or m^k), guarded against unrenderable sizes.
fn grid_side(base: u32, k: u32) -> anyhow::Result<u64> {
    (base as u64)
        .checked_pow(k)
        .filter(|&v| v <= 1 << 24)
        .with_context(|| format!("grid side {base}^{k} is too large to rasterize; lower --depth"))
}

/// Integer upscale factors from the requested pixel dimensions. Each given
/// dimension must be a positive multiple of its grid side; when only one is
/// given, the same factor applies to both axes (square pixels).
fn scale_factors(
    base_w: u64,
    base_h: u64,
    width: Option<u64>,
    height: Option<u64>,
) -> anyhow::Result<(u64, u64)> {
    let factor = |want: u64, base: u64, axis: &str| -> anyhow::Result<u64> {
        if want == 0 || !want.is_multiple_of(base) {
            bail!("requested {axis} {want} is not a positive multiple of the grid side {base}");
        }
        Ok(want / base)
    };
    Ok(match (width, height) {
        (None, None) => (1, 1),
        (Some(w), None) => {
            let s = factor(w, base_w, "width")?;
            (s, s)
        }
        (None, Some(h)) => {
            let s = factor(h, base_h, "height")?;
            (s, s)
        }
        (Some(w), Some(h)) => (factor(w, base_w, "width")?, factor(h, base_h, "height")?),
    })
}

/// Render the level-k cell set as a binary PBM (P4). One pixel per cell
/// unless upscaled; by default grid row j = 0 is the bottom raster row.
pub(crate) fn render_pbm(
    pattern: &CarpetPattern,
    k: u32,
    budget: usize,
    flip_y: bool,
    width: Option<u64>,
    height: Option<u64>,
) -> anyhow::Result<Vec<u8>> {
    let cells = pattern.cells_with_budget(k, budget)?;
    let base_w = grid_side(pattern.n(), k)?;
    let base_h = grid_side(pattern.m(), k)?;
    let (sx, sy) = scale_factors(base_w, base_h, width, height)?;
    let (w, h) = (base_w * sx, base_h * sy);
    let row_bytes = w.div_ceil(8);
    if row_bytes.checked_mul(h).is_none_or(|t| t > MAX_PIXEL_BYTES) {
        bail!("a {w}x{h} bitmap exceeds the pixel budget; lower --depth or the pixel size");
    }

    // One sorted column list per occupied grid row.
    let mut rows: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(i, j) in &cells.cells {
        rows.entry(j as u64).or_default().push(i as u64);
    }

    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let mut row_buf = vec![0u8; row_bytes as usize];
    for r in 0..h {
        let block = r / sy;
        let j = if flip_y { block } else { base_h - 1 - block };
        row_buf.iter_mut().for_each(|b| *b = 0);
        if let Some(cols) = rows.get(&j) {
            for &i in cols {
                for c in i * sx..(i + 1) * sx {
                    row_buf[(c >> 3) as usize] |= 0x80 >> (c & 7);
                }
            }
        }
        out.extend_from_slice(&row_buf);
    }
    Ok(out)
}

fn f64_of(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Render the level-k cell set as a self-contained SVG, then draw overlays
/// (hull polygon, slice intervals, witness markers) in exact coordinates.
pub(crate) fn render_svg(
    pattern: &CarpetPattern,
    k: u32,
    budget: usize,
    flip_y: bool,
    width: Option<u64>,
    height: Option<u64>,
    overlays: &[Overlay],
) -> anyhow::Result<String> {
    let cells = pattern.cells_with_budget(k, budget)?;
    let base_w = grid_side(pattern.n(), k)? as f64;
    let base_h = grid_side(pattern.m(), k)? as f64;
    let w = width.unwrap_or(512) as f64;
    let h = height
        .map(|v| v as f64)
        .unwrap_or_else(|| (w * base_h / base_w).round().max(1.0));

    // Map carpet coordinates [0,1]^2 to pixels; by default carpet y points up.
    let px = |x: f64| x * w;
    let py = |y: f64| if flip_y { y * h } else { (1.0 - y) * h };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )?;
    writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#)?;

    let cw = w / base_w;
    let ch = h / base_h;
    for &(i, j) in &cells.cells {
        let x = i as f64 * cw;
        let y = if flip_y { j as f64 * ch } else { h - (j as f64 + 1.0) * ch };
        writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="black"/>"#
        )?;
    }

    for overlay in overlays {
        match overlay {
            Overlay::Hull => {
                let hull = convex_hull(pattern)?;
                let points: Vec<String> = hull
                    .vertices()
                    .iter()
                    .map(|v| format!("{:.3},{:.3}", px(f64_of(&v.0)), py(f64_of(&v.1))))
                    .collect();
                writeln!(
                    s,
                    r##"<polygon points="{}" fill="none" stroke="#d43d2a" stroke-width="2"/>"##,
                    points.join(" ")
                )?;
            }
            Overlay::Slice(yv) => {
                let y_px = py(f64_of(yv));
                for expansion in slice_digits(pattern, yv)? {
                    let approx = slice_approx_with_budget(pattern, &expansion, k, budget)?;
                    let unit = f64_of(&approx.unit());
                    for &a in &approx.left_endpoints {
                        let x0 = px(a as f64 * unit);
                        let x1 = px((a + 1) as f64 * unit);
                        writeln!(
                            s,
                            r##"<line x1="{x0:.3}" y1="{y_px:.3}" x2="{x1:.3}" y2="{y_px:.3}" stroke="#17862d" stroke-width="3"/>"##
                        )?;
                    }
                }
            }
            Overlay::Witness(xv, yv) => {
                let (cx, cy) = (px(f64_of(xv)), py(f64_of(yv)));
                let r = 6.0;
                writeln!(
                    s,
                    r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#1a56cc" stroke-width="2"/>"##,
                    cx - r,
                    cy - r,
                    cx + r,
                    cy + r
                )?;
                writeln!(
                    s,
                    r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#1a56cc" stroke-width="2"/>"##,
                    cx - r,
                    cy + r,
                    cx + r,
                    cy - r
                )?;
            }
        }
    }

    writeln!(s, "</svg>")?;
    Ok(s)
}
