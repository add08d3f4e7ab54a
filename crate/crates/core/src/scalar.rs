//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into this scalar.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    /// A tolerance of `x` (stated for double precision), floored at a
    /// small multiple of this type's machine epsilon.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(1.0e4))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `-i z`.
#[inline]
pub(crate) fn times_minus_i<T: Real>(z: C<T>) -> C<T> {
    Complex::new(z.im, -z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_is_floored_by_precision() {
        assert_eq!(f64::tol(1e-9), 1e-9);
        assert!(f32::tol(1e-9) > 1e-4);
    }

    #[test]
    fn minus_i_rotation() {
        let z = cplx(2.0_f64, 3.0);
        assert_eq!(times_minus_i(z), cplx(3.0, -2.0));
        assert_eq!(times_minus_i(z), z * cplx(0.0, -1.0));
    }
}
