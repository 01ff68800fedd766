//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`], a floating-point trait
//! alias built on `num-traits`. `f64` is the intended production scalar;
//! `f32` works for quick exploration but the documented tolerances assume
//! binary64.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the whole crate.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` constant into the working scalar.
///
/// Panics only if the target type cannot represent ordinary finite constants,
/// which no `Real` implementor of interest does.
#[inline]
pub fn cast<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite f64 constant must convert")
}

/// `pi` in the working scalar.
#[inline]
pub fn pi<R: Real>() -> R {
    cast(std::f64::consts::PI)
}
