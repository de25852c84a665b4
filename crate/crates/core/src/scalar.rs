//! Scalar abstraction for the numeric core.
//!
//! All geometry and solver code is generic over [`Real`] so the same routines
//! run in `f32` or `f64`. Crate-root aliases pin the default precision.

use num_traits::{FromPrimitive, NumCast};

/// Floating-point scalar usable by every numeric routine in this crate.
pub trait Real: nalgebra::RealField + Copy + FromPrimitive + NumCast {}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting literals into the active scalar type.
#[inline]
pub(crate) fn cast<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}
