//! `carpet` — exact geometry of grid self-affine carpets from the command
//! line: bitmap/SVG rendering, structure reports, slice anatomy, convex-hull
//! angle tables, oblique-projection box counting, and certification or
//! refutation of self-embedding similitudes.
//!
//! Exit status contract: 0 = certified / found / report produced,
//! 1 = refuted / nothing found / empty result, 2 = undecided or error.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub(crate) const EXIT_OK: u8 = 0;
pub(crate) const EXIT_NEGATIVE: u8 = 1;
pub(crate) const EXIT_UNKNOWN: u8 = 2;

/// Pattern files are plain text: a first line `n m`, then one `i j` digit
/// per line (0 ≤ i < n, 0 ≤ j < m); `#` starts a comment. Pass `-` to read
/// the pattern from stdin.
#[derive(Parser)]
#[command(
    name = "carpet",
    version,
    about = "Exact geometry of grid self-affine carpets",
    long_about = "Renders, reports on, slices, and certifies grid self-affine carpets.\n\
                  A carpet is described by a pattern file: a grid size `n m` on the first\n\
                  line and one selected cell `i j` per following line (`#` comments).\n\
                  All structural computations are exact (big rationals); numeric output\n\
                  is evaluated to a controlled number of decimal digits."
)]
pub(crate) struct Cli {
    /// Decimal digits carried by high-precision evaluations.
    #[arg(long, global = true, default_value_t = 50)]
    pub(crate) precision: u32,

    /// Refinement depth / level (meaning depends on the subcommand).
    #[arg(long, global = true)]
    pub(crate) depth: Option<u32>,

    /// Cell/state budget for enumerations and searches.
    #[arg(long, global = true)]
    pub(crate) budget: Option<usize>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub(crate) out: Option<PathBuf>,

    /// Emit a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub(crate) json: bool,

    #[command(subcommand)]
    pub(crate) command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub(crate) enum Format {
    /// Binary PBM (P4) bitmap, one pixel per level-k cell unless upscaled.
    Pbm,
    /// Self-contained SVG with optional overlays.
    Svg,
}

#[derive(Subcommand)]
pub(crate) enum Command {
    /// Rasterize the level-k cell approximation (PBM P4 or SVG).
    ///
    /// --depth selects k (default 1). The PBM canvas is exactly n^k x m^k
    /// pixels unless --width/--height request an integer upscale.
    Render {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Output format; inferred from the --out extension when omitted
        /// (default: pbm).
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Output width in pixels (PBM: must be a multiple of n^depth).
        #[arg(long)]
        width: Option<u64>,
        /// Output height in pixels (PBM: must be a multiple of m^depth).
        #[arg(long)]
        height: Option<u64>,
        /// Put grid row j = 0 at the top instead of the bottom.
        #[arg(long)]
        flip_y: bool,
        /// SVG overlay: "hull", "slice=<y>", or "witness=<x>,<y>". Repeatable.
        #[arg(long)]
        overlay: Vec<String>,
    },

    /// Full structure report: dimension, classification, hull, slice bounds.
    Report {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
    },

    /// Horizontal slice anatomy at a rational height y: interval counts,
    /// largest gaps, exact lower box dimension, isolated points.
    ///
    /// --depth is the finest reported level (default 3); exits 1 when the
    /// slice is empty (y has no admissible digit expansion).
    Slice {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Height, as a rational ("1/2") or a terminating decimal ("0.5").
        y: String,
        /// Certification level for gap reports (default: depth + 2).
        #[arg(long)]
        cert_level: Option<u32>,
    },

    /// Convex hull geometry: vertices, interior angles, angle-class sums,
    /// the rational-tangent admissibility verdicts, separation check.
    Hull {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Also march limit points along the given edge (1-based index).
        #[arg(long)]
        march: Option<usize>,
    },

    /// Decide whether a similitude maps the carpet into itself.
    ///
    /// The map literal is whitespace-separated key=value pairs:
    /// `scale=1/6` or `scale=2^-3*5^1/2`, `rot=a,b` or `refl=a,b` (a
    /// rational point on the unit circle), `t=x,y`. Omitted parts default
    /// to the identity. Exit 0 = certified, 1 = refuted, 2 = undecided.
    Verify {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Similitude literal, e.g. "scale=1 refl=3/5,-4/5 t=3/5,6/5".
        map: String,
    },

    /// Enumerate the isometries carrying a square-grid carpet onto itself.
    ///
    /// Exit 0 when a symmetry beyond the identity exists, 1 otherwise.
    Search {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Largest hypotenuse of the rational rotation/reflection grid.
        #[arg(long, default_value_t = 5)]
        max_hyp: u64,
    },

    /// Box-count an oblique projection of the carpet (CSV + slope estimate).
    Project {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
        /// Projection direction "u1,u2" (rationals, both nonzero).
        #[arg(long, default_value = "1,1")]
        direction: String,
        /// Half-open level window "lo..hi" for the box counts.
        #[arg(long, default_value = "6..12")]
        k_range: String,
        /// Also run the exact projected-corner growth check at this depth.
        #[arg(long)]
        growth_depth: Option<u32>,
    },

    /// Compare the typical-slice bound max(dim-1, 0) against the
    /// row-counting bound log N / log n.
    Marstrand {
        /// Pattern file ("-" for stdin).
        pattern: PathBuf,
    },
}

/// Honour CARPET_THREADS as a hard cap on data parallelism.
fn configure_threads() {
    if let Ok(v) = std::env::var("CARPET_THREADS") {
        if let Ok(t) = v.parse::<usize>() {
            if t > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_UNKNOWN)
        }
    }
}
