//! Real scalar abstraction shared by every numeric routine in the crate.

use std::fmt;

use num_complex::Complex;

/// Real floating point scalar: `f32` or `f64`.
///
/// The nalgebra bound is needed by the SVD and LU routines that back the
/// nullspace and inverse computations; the num-traits bound carries the
/// elementary functions used everywhere else.
pub trait Real:
    nalgebra::RealField + num_traits::Float + num_traits::FromPrimitive + fmt::Display + fmt::Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn lit(v: f64) -> Self {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn lit(v: f64) -> Self {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Modulus of a complex number.
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm()
}

pub(crate) fn is_finite<T: Real>(z: Complex<T>) -> bool {
    num_traits::Float::is_finite(z.re) && num_traits::Float::is_finite(z.im)
}
