//! Dual-mode arithmetic: binary floating point and exact big rationals.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. The float
//! instance compares with a relative tolerance of [`TOLERANCE`]; the
//! rational instance compares exactly.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Relative tolerance used by all float-mode equality tests.
pub const TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Signed
{
    /// True for the exact rational instance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// `a == b` under the crate tolerance policy.
    fn approx_eq(&self, other: &Self) -> bool;

    /// `|a| == |b|` under the crate tolerance policy: the indecisive-edge test.
    fn abs_eq(&self, other: &Self) -> bool {
        self.abs().approx_eq(&other.abs())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= TOLERANCE * scale
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

/// Converts a finite float to the rational with the same binary value.
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_f64(v)
}

pub(crate) fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

pub(crate) fn four<T: Scalar>() -> T {
    T::from_i64(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_tolerance_is_relative() {
        assert!(1e12f64.approx_eq(&(1e12 + 1.0)));
        assert!(!1.0f64.approx_eq(&1.000001));
        assert!(0.0f64.approx_eq(&1e-10));
        assert!((-3.0f64).abs_eq(&3.0));
    }

    #[test]
    fn rational_is_exact() {
        let a = <BigRational as Scalar>::from_i64(3);
        let b = a.clone() + BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000_000i64));
        assert!(!a.approx_eq(&b));
        assert!(a.abs_eq(&-a.clone()));
        assert_eq!(rational_from_f64(0.5), Some(BigRational::new(1.into(), 2.into())));
    }
}
