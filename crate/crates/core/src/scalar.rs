//! Scalar abstraction for the numeric kernels.
//!
//! The correlation reparameterisation, the deterministic Gaussian moves and
//! the autocorrelation estimators are written against [`Real`] so they run in
//! either `f32` or `f64`. The Gibbs engine itself is `f64` only.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the generic kernels: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count into `T`.
#[inline]
pub(crate) fn count<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}
