//! Error type shared by all carpet-core operations.

use thiserror::Error;

/// Everything that can go wrong across the library.
///
/// Variants are grouped by failure class rather than by module so callers can
/// match on the *kind* of problem (bad input text, violated precondition,
/// exhausted budget, ...) without caring which subsystem raised it.
#[derive(Debug, Error)]
pub enum CarpetError {
    /// Pattern file or literal text could not be parsed. Carries the
    /// 1-indexed line number of the offending line where applicable.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally well-formed input that violates a validity rule
    /// (digit out of range, duplicate digit, too few/too many digits, ...).
    #[error("invalid pattern: {0}")]
    Validation(String),

    /// Argument outside an operation's domain (point outside the unit
    /// square, digit not in the pattern, base 1 logarithm, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured budget (cell count, BFS state count) would be exceeded.
    /// Work is never silently truncated; the caller must raise the budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// Composition of maps that the algebra cannot represent exactly,
    /// e.g. a diagonal-affine map against a non-axis-aligned orthogonal part.
    #[error("unsupported composition: {0}")]
    UnsupportedComposition(String),

    /// Hull requested for a pattern whose cylinder fixed points are
    /// collinear, so no two-dimensional convex polygon exists.
    #[error("degenerate hull: {0}")]
    DegenerateHull(String),

    /// An operation's stated precondition does not hold for these inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, CarpetError>;
