use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_traits::Float;

/// Field operations shared by `f64` and `Complex64` so recurrences can be
/// written once for real arguments and for their continuation off the axis.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn principal_ln(self) -> Self;
    fn principal_sqrt(self) -> Self;
    fn to_complex(self) -> Complex64;
    /// `int_{-1}^{1} dmu / (z - mu)` for `z` off the segment.
    fn cauchy_log(self) -> Self;

    fn zero() -> Self {
        Self::real(0.0)
    }

    fn one() -> Self {
        Self::real(1.0)
    }

    fn pow_n(self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out *= self;
        }
        out
    }
}

impl Scalar for f64 {
    fn real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        Float::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn principal_ln(self) -> Self {
        Float::ln(self)
    }
    fn principal_sqrt(self) -> Self {
        Float::sqrt(self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn cauchy_log(self) -> Self {
        Float::ln((self + 1.0) / (self - 1.0))
    }
}

impl Scalar for Complex64 {
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn principal_ln(self) -> Self {
        Complex64::ln(self)
    }
    fn principal_sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn cauchy_log(self) -> Self {
        // difference of principal logs keeps the cut on [-1, 1] only
        Complex64::ln(self + 1.0) - Complex64::ln(self - 1.0)
    }
}
