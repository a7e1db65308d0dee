//! Field abstraction shared by the exact-rational and floating backends.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number used by the exact backend.
pub type Rational = BigRational;

/// A field element usable as a polynomial-matrix coefficient.
///
/// `f64` is the floating backend used by estimation; [`Rational`] is the exact
/// backend used by the Wiener-Hopf construction.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for backends where `is_zero` is an exact test.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Pivot quality; larger is better.
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
}

/// `num/den` as a rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Best rational approximation of `x` by continued-fraction expansion.
///
/// Stops at the first convergent within `tol` of `x` (absolute), or when the
/// denominator would exceed `max_den`. Returns `None` for non-finite input or
/// when no convergent reaches the tolerance.
pub fn rationalize(x: f64, tol: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = rem - a;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.375, 1e-12, 1_000_000), Some(ratio(3, 8)));
        assert_eq!(rationalize(-457.0 / 360.0, 1e-12, 1_000_000), Some(ratio(-457, 360)));
        assert_eq!(rationalize(2.0, 1e-12, 10), Some(ratio(2, 1)));
        assert!(rationalize(f64::NAN, 1e-12, 10).is_none());
    }

    #[test]
    fn pi_needs_large_denominator() {
        assert!(rationalize(core::f64::consts::PI, 1e-12, 1000).is_none());
    }
}
