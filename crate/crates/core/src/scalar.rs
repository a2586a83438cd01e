//! Scalar traits shared by the numeric kernel.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, Zero};

/// Floating point scalar used by the kernel. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Field<R = Self>
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field element usable in dense LU: real or complex.
pub trait Field: Copy + Num + NumAssign + std::ops::Neg<Output = Self> + Debug + Send + Sync {
    type R: Real;
    fn modulus(&self) -> Self::R;
    fn from_real(r: Self::R) -> Self;
    fn conj(&self) -> Self;
}

macro_rules! real_field {
    ($t:ty) => {
        impl Field for $t {
            type R = $t;
            #[inline]
            fn modulus(&self) -> $t {
                self.abs()
            }
            #[inline]
            fn from_real(r: $t) -> $t {
                r
            }
            #[inline]
            fn conj(&self) -> $t {
                *self
            }
        }
    };
}
real_field!(f32);
real_field!(f64);

impl<T: Real> Field for Complex<T> {
    type R = T;
    #[inline]
    fn modulus(&self) -> T {
        self.norm()
    }
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

/// Coefficient ring for polynomials. Exact types such as rationals qualify.
pub trait Coeff: Clone + Num + std::ops::Neg<Output = Self> + Debug {}
impl<T> Coeff for T where T: Clone + Num + std::ops::Neg<Output = T> + Debug {}

/// `n * x` by repeated doubling, valid in any ring.
pub fn times<C: Coeff>(x: &C, n: usize) -> C {
    let mut acc = C::zero();
    let mut base = x.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        k >>= 1;
    }
    acc
}

pub(crate) fn is_zero<C: Coeff>(x: &C) -> bool {
    Zero::is_zero(x)
}
