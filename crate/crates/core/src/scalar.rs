//! Numeric abstractions shared by the model code.
//!
//! The market algebra only needs field operations and ordering, so it is
//! written against [`Scalar`] and runs on `f32`, `f64` or exact rationals
//! ([`num_rational::Rational64`]). Anything that takes logarithms or square
//! roots asks for [`Real`] instead.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar: Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {
    fn int(v: i32) -> Self {
        Self::from_i32(v).expect("small integers are representable")
    }

    /// Lossy conversion from a literal; exact for rationals only when `v`
    /// has a short continued fraction.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        self.max_of(lo).min_of(hi)
    }
}

impl<T> Scalar for T where T: Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// A floating-point [`Scalar`].
pub trait Real: Scalar + Float {}

impl<T> Real for T where T: Scalar + Float {}
