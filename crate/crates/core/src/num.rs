//! Scalar abstraction for the floating-point parts of the library.
//!
//! All probability, distance, and training math is generic over [`Real`],
//! so the same code runs at `f32` or `f64`. The crate root exposes `f64`
//! aliases for the common types; accuracy contracts in the test suite are
//! stated at `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar usable throughout the library.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` constant into the working scalar.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Convert an integer count into the working scalar.
#[inline]
pub fn real_of_u64<F: Real>(x: u64) -> F {
    F::from_u64(x).unwrap_or_else(|| real(x as f64))
}

/// Convert a usize count into the working scalar.
#[inline]
pub fn real_of_usize<F: Real>(x: usize) -> F {
    F::from_usize(x).unwrap_or_else(|| real(x as f64))
}
