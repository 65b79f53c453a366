//! Scalar abstraction shared by every numerical kernel in the crate.
//!
//! All math is written against [`Real`], so the same code runs in `f32` for
//! quick smoke runs and in `f64` for the production paths. Complex values use
//! [`num_complex::Complex`] over the same scalar.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(v: &[Cplx<T>]) -> T {
    // scaled accumulation avoids overflow for the e^{phi/h} weighted vectors
    let scale = v.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = v.iter().map(|z| (*z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}
