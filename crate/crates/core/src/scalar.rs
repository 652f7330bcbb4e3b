//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar the engine is generic over (`f32` or `f64`).
///
/// The acceptance tolerances are calibrated for `f64`; `f32` is supported for
/// quick exploratory runs and type-level reuse only.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn i_unit<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::one())
}

/// `(sin(a b), cos(a b))` with the product carried to twice working
/// precision. Long-lag kernel sums cancel by many orders, and the rounding of
/// `a b` alone would otherwise set their noise floor.
#[inline]
pub(crate) fn sin_cos_of_product<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    let (s, c) = p.sin_cos();
    (s + e * c, c - e * s)
}
