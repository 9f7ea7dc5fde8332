use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Coefficient field used by polynomials and Weyl operators.
///
/// `f64` is the production scalar. [`BigRational`] gives bit-exact algebra for
/// tests of commutation rules and simplex integrals.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_integer(n: i64) -> Self;

    /// Terms whose coefficient is negligible are dropped from term maps.
    fn is_negligible(&self) -> bool;

    fn to_f64(&self) -> f64;

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Coefficients below this magnitude are pruned in float mode.
pub const FLOAT_PRUNE: f64 = 1e-300;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_integer(n: i64) -> Self {
        n as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() < FLOAT_PRUNE
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pow(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        num_traits::One::one()
    }

    fn from_integer(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn is_negligible(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Convenience constructor for exact rationals in tests and examples.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
