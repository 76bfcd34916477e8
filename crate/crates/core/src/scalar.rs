//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Sum + Debug + Display + LowerExp + Default
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    /// Absolute tolerance that is meaningful at this precision: `max(tol, 64 eps)`.
    #[inline]
    fn tol(tol: f64) -> Self {
        Self::lit(tol).max(Self::lit(64.0) * Self::epsilon())
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    let q = T::one() - p;
    -(p * p.log2() + q * q.log2())
}

/// Gaussian upper-tail probability `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_tail<T: Real>(x: T) -> T {
    T::lit(0.5) * (x / T::SQRT_2()).erfc()
}

/// Standard normal cumulative distribution function.
pub fn gaussian_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc()
}
