//! Exact-arithmetic toolkit for self-affine carpets.

pub mod bigfloat;
pub mod certify;
pub mod digits;
pub mod dimlab;
pub mod error;
pub mod hull;
pub mod pattern;
pub mod ratio;
pub mod similitude;

pub use error::{CarpetError, Result};
