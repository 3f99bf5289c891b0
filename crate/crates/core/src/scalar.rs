//! Floating point abstraction shared by the geometric and polynomial cores.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used by the planner math: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every supported scalar can represent (an
    /// approximation of) any finite `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Wraps an angle into `(-pi, pi]`.
    fn wrap_angle(self) -> Self {
        let two_pi = Self::TAU();
        let mut a = self % two_pi;
        if a <= -Self::PI() {
            a += two_pi;
        } else if a > Self::PI() {
            a -= two_pi;
        }
        a
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
