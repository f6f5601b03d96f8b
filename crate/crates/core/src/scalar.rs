//! Scalar abstractions.
//!
//! Everything that needs square roots, eigenvalues or logarithms is generic
//! over [`Real`] (implemented for `f32` and `f64`). The moment recursions only
//! need field arithmetic and are generic over [`Field`], which additionally
//! covers exact rationals.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, ToPrimitive};

pub use nalgebra::Complex;

/// Floating point scalar used by the numerical parts of the crate.
pub trait Real: RealField + Copy + ToPrimitive + LowerExp + Display + Debug + Default + Field {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// `base`, raised to a few ulps of the type when the type is coarser.
    #[inline]
    fn tolerance(base: f64) -> Self {
        Self::lit(base).max(Self::default_epsilon() * Self::lit(64.0))
    }

    /// Lossy conversion used for sampling and output formatting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field arithmetic with exact embedding of integers.
pub trait Field: Clone + Num + Debug {
    fn from_integer(n: i64) -> Self;
}

impl Field for f64 {
    fn from_integer(n: i64) -> Self {
        n as f64
    }
}

impl Field for f32 {
    fn from_integer(n: i64) -> Self {
        n as f32
    }
}

impl Field for Rational64 {
    fn from_integer(n: i64) -> Self {
        Rational64::from_integer(n)
    }
}

impl Field for BigRational {
    fn from_integer(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// `i^k` for `k` taken mod 4.
pub fn i_pow<T: Real>(k: u8) -> Complex<T> {
    match k & 3 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// Modulus of a complex number.
#[inline]
pub fn cabs<T: Real>(c: Complex<T>) -> T {
    c.norm_sqr().sqrt()
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
